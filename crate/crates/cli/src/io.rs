//! File formats and flag value parsing.

use crate::CliError;
use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use xxz_im::circuit::{InfluenceMatrix, Method};

pub const ORDERING: &str = "appendixC";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexList {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexList {
    pub fn from_c64(z: &[C64]) -> Self {
        ComplexList { re: z.iter().map(|x| x.re).collect(), im: z.iter().map(|x| x.im).collect() }
    }

    pub fn to_c64(&self) -> Result<Vec<C64>, CliError> {
        if self.re.len() != self.im.len() {
            return Err(CliError::Usage("re and im arrays differ in length".into()));
        }
        Ok(self.re.iter().zip(&self.im).map(|(&r, &i)| C64::new(r, i)).collect())
    }
}

/// On-disk IM: amplitudes in the leg ordering (s̄_{2N} … s̄_1, s_1 … s_{2N}).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImFile {
    pub n_half: usize,
    pub ordering: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_ladder: Option<ComplexList>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ImFile {
    pub fn from_im(im: &InfluenceMatrix) -> Self {
        let amps = ComplexList::from_c64(&im.amps);
        ImFile {
            n_half: im.n_half,
            ordering: ORDERING.into(),
            method: Some(im.method.tag().into()),
            digits: im.digits,
            epsilon_ladder: im.epsilon_ladder.as_deref().map(ComplexList::from_c64),
            error_estimate: im.error_estimate,
            re: amps.re,
            im: amps.im,
        }
    }

    pub fn into_im(self) -> Result<InfluenceMatrix, CliError> {
        if self.ordering != ORDERING {
            return Err(CliError::Usage(format!("unknown ordering {:?}, expected {ORDERING:?}", self.ordering)));
        }
        let amps = ComplexList { re: self.re, im: self.im }.to_c64()?;
        Ok(InfluenceMatrix::new(amps, self.n_half, Method::External, None)?)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    std::fs::write(path, s).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn read_im(path: &Path) -> Result<InfluenceMatrix, CliError> {
    let f: ImFile =
        serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    f.into_im()
}

/// 2×2 complex matrix as {"re": [[a, b], [c, d]], "im": [[..], [..]]}; `im` may be omitted.
#[derive(Debug, Clone, Deserialize)]
struct MatrixFile {
    re: [[f64; 2]; 2],
    #[serde(default)]
    im: [[f64; 2]; 2],
}

pub fn read_matrix2(path: &Path) -> Result<Matrix2<C64>, CliError> {
    let m: MatrixFile =
        serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(Matrix2::from_fn(|i, j| C64::new(m.re[i][j], m.im[i][j])))
}

/// Complex literal: sums of terms such as `0.3`, `-1.2e-3`, `0.8i`, `i*pi/2`, `2pi/3`.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().replace("pi", "π");
    if t.is_empty() {
        return Err("empty complex literal".into());
    }
    let chars: Vec<char> = t.chars().collect();
    let mut terms = Vec::new();
    let mut start = 0;
    for k in 1..chars.len() {
        let split = matches!(chars[k], '+' | '-') && !matches!(chars[k - 1], 'e' | 'E' | '*' | '/');
        if split {
            terms.push(chars[start..k].iter().collect::<String>());
            start = k;
        }
    }
    terms.push(chars[start..].iter().collect());
    let mut z = C64::new(0.0, 0.0);
    for term in terms {
        z += parse_term(&term).map_err(|e| format!("{s:?}: {e}"))?;
    }
    Ok(z)
}

fn parse_term(term: &str) -> Result<C64, String> {
    let (sign, body) = match term.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, term.strip_prefix('+').unwrap_or(term)),
    };
    let imag = body.matches('i').count();
    if imag > 1 {
        return Err(format!("bad term {term:?}"));
    }
    let real_part = body.replacen('i', "", 1);
    let real_part = real_part.trim_matches('*').replace("**", "*");
    let x = if real_part.is_empty() { 1.0 } else { eval_product(&real_part)? };
    Ok(if imag == 1 { C64::new(0.0, sign * x) } else { C64::new(sign * x, 0.0) })
}

fn eval_product(expr: &str) -> Result<f64, String> {
    let mut acc = 1.0;
    let mut op = '*';
    let mut cur = String::new();
    let flush = |cur: &str, op: char, acc: &mut f64| -> Result<(), String> {
        let v = eval_factor(cur)?;
        if op == '*' {
            *acc *= v;
        } else {
            *acc /= v;
        }
        Ok(())
    };
    for c in expr.chars() {
        if c == '*' || c == '/' {
            flush(&cur, op, &mut acc)?;
            cur.clear();
            op = c;
        } else {
            cur.push(c);
        }
    }
    flush(&cur, op, &mut acc)?;
    Ok(acc)
}

fn eval_factor(f: &str) -> Result<f64, String> {
    if let Some(num) = f.strip_suffix('π') {
        return Ok(if num.is_empty() { PI } else { eval_factor(num)? * PI });
    }
    f.parse::<f64>().map_err(|_| format!("cannot read {f:?} as a number"))
}

pub fn parse_complex_list(s: &str) -> Result<Vec<C64>, String> {
    s.split(',').map(parse_complex).collect()
}

pub fn parse_occupations(s: &str) -> Result<[usize; 4], String> {
    let v: Vec<usize> =
        s.split(',').map(|x| x.trim().parse::<usize>().map_err(|_| format!("bad occupation {x:?}"))).collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| "expected four occupations n1,n2,n3,n4".to_string())
}

pub fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let v: Vec<usize> =
        s.split(',').map(|x| x.trim().parse::<usize>().map_err(|_| format!("bad window bound {x:?}"))).collect::<Result<_, _>>()?;
    match v[..] {
        [a, b] if a <= b => Ok((a, b)),
        _ => Err("expected a window lo,hi with lo ≤ hi".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let c = |s| parse_complex(s).unwrap();
        assert_eq!(c("0.3"), C64::new(0.3, 0.0));
        assert_eq!(c("0.1+0.8i"), C64::new(0.1, 0.8));
        assert_eq!(c("-2.5e-3-1e2i"), C64::new(-2.5e-3, -100.0));
        assert_eq!(c("i*pi/2"), C64::new(0.0, PI / 2.0));
        assert_eq!(c("0.2 + pi/2*i"), C64::new(0.2, PI / 2.0));
        assert_eq!(c("2pi/3"), C64::new(2.0 * PI / 3.0, 0.0));
        assert_eq!(c("-i"), C64::new(0.0, -1.0));
        assert!(parse_complex("1+ii").is_err());
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_occupations("2,2,1,0").unwrap(), [2, 2, 1, 0]);
        assert!(parse_occupations("1,2").is_err());
        assert_eq!(parse_complex_list("1e-2,5e-3").unwrap().len(), 2);
        assert_eq!(parse_window("8,42").unwrap(), (8, 42));
        assert!(parse_window("9,3").is_err());
    }

    #[test]
    fn im_file_roundtrip() {
        let amps: Vec<C64> = (0..16).map(|k| C64::new(k as f64, -(k as f64) / 3.0)).collect();
        let im = InfluenceMatrix::new(amps.clone(), 1, Method::Circuit, None).unwrap();
        let f = ImFile::from_im(&im);
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.contains("\"ordering\":\"appendixC\""));
        let back: ImFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_im().unwrap().amps, amps);
    }
}
