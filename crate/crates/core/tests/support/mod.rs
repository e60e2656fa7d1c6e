//! Brute-force state-vector simulation of a finite brick-wall chain.

use nalgebra::Matrix2;
use xxz_im::C64;

type Gate = [[C64; 4]; 4];

/// Ř(u) = P·R(u) written out from the six-vertex weights; basis |00⟩,|01⟩,|10⟩,|11⟩ with 0 = up.
fn gate(eta: C64, u: C64) -> Gate {
    let (a, b, c) = (u.sinh() / (u + eta).sinh(), eta.sinh() / (u + eta).sinh(), C64::new(1.0, 0.0));
    let z = C64::new(0.0, 0.0);
    [[c, z, z, z], [z, b, a, z], [z, a, b, z], [z, z, z, c]]
}

/// (Ř⁻¹)†: the gate that evolves bras when the backward branch carries Ř⁻¹.
fn inverse_adjoint(g: &Gate) -> Gate {
    let z = C64::new(0.0, 0.0);
    let (p, q, r, s) = (g[1][1], g[1][2], g[2][1], g[2][2]);
    let det = p * s - q * r;
    let inv = [[s / det, -q / det], [-r / det, p / det]];
    let one = C64::new(1.0, 0.0);
    let d0 = one / g[0][0];
    let d3 = one / g[3][3];
    [
        [d0.conj(), z, z, z],
        [z, inv[0][0].conj(), inv[1][0].conj(), z],
        [z, inv[0][1].conj(), inv[1][1].conj(), z],
        [z, z, z, d3.conj()],
    ]
}

fn apply(g: &Gate, psi: &mut [C64], sites: usize, i: usize) {
    let (hi, lo) = (1usize << (sites - 1 - i), 1usize << (sites - 2 - i));
    for idx in 0..psi.len() {
        if idx & (hi | lo) != 0 {
            continue;
        }
        let ks = [idx, idx | lo, idx | hi, idx | hi | lo];
        let old = ks.map(|k| psi[k]);
        for (r, &k) in ks.iter().enumerate() {
            psi[k] = (0..4).map(|c| g[r][c] * old[c]).sum();
        }
    }
}

/// Odd layers couple (c+2k, c+2k+1) around the boundary spin c, even layers the other bonds.
fn evolve(g: &Gate, psi: &mut [C64], sites: usize, layers: usize, centre: usize) {
    for t in 1..=layers {
        let offset = if t % 2 == 1 { centre % 2 } else { 1 - centre % 2 };
        let mut i = offset;
        while i + 1 < sites {
            apply(g, psi, sites, i);
            i += 2;
        }
    }
}

/// Tr(O U ρ U⁻¹) after 2N layers, with ρ = ρ_b^{⊗} ⊗ ρ₀ on the boundary spin and
/// ρ_b = diag(q, 1/q)/(q + 1/q). Sums exactly over the diagonal bath configurations.
/// The chain has 4N + 2·margin sites; 4N already holds the backward light cone.
pub fn chain_one_point(
    eta: C64,
    u: C64,
    q: f64,
    n_half: usize,
    margin: usize,
    rho0: &Matrix2<C64>,
    obs: &Matrix2<C64>,
) -> C64 {
    let sites = 4 * n_half + 2 * margin;
    let centre = 2 * n_half + margin;
    let layers = 2 * n_half;
    let g = gate(eta, u);
    let gb = inverse_adjoint(&g);
    let z = q + 1.0 / q;
    let weights = [q / z, 1.0 / (q * z)];
    let cbit = sites - 1 - centre;
    let dim = 1usize << sites;
    let mut total = C64::new(0.0, 0.0);
    for config in 0..dim {
        if config >> cbit & 1 == 1 {
            continue;
        }
        let w: f64 = (0..sites).filter(|&b| b != cbit).map(|b| weights[config >> b & 1]).product();
        let evolved = |gate: &Gate, a: usize| {
            let mut psi = vec![C64::new(0.0, 0.0); dim];
            psi[config | a << cbit] = C64::new(1.0, 0.0);
            evolve(gate, &mut psi, sites, layers, centre);
            psi
        };
        let kets = [evolved(&g, 0), evolved(&g, 1)];
        let bras = [evolved(&gb, 0), evolved(&gb, 1)];
        for a in 0..2 {
            for b in 0..2 {
                if rho0[(a, b)].norm() == 0.0 {
                    continue;
                }
                let mut amp = C64::new(0.0, 0.0);
                for idx in 0..dim {
                    let s = idx >> cbit & 1;
                    for t in 0..2 {
                        let src = (idx & !(1 << cbit)) | t << cbit;
                        amp += bras[b][idx].conj() * obs[(s, t)] * kets[a][src];
                    }
                }
                total += w * rho0[(a, b)] * amp;
            }
        }
    }
    total
}
