//! Exact few-photon Fock states over a fixed list of optical modes.
//!
//! A mode is one (spatial port, polarization) pair; ports are indexed by a
//! [`super::network::ModeNetwork`] and each port owns two consecutive mode
//! slots (H then V). States are finite maps from occupation vectors to
//! complex amplitudes with every coefficient carried exactly — no
//! truncation beyond the declared photon budget, which linear elements
//! cannot exceed anyway.
//!
//! Linear elements act by creation-operator substitution
//! a†_m → Σ_n U[n][m] a†_n, expanded multinomially per term. With at most
//! three photons the expansion per term is tiny.

use num_complex::Complex64;
use std::collections::BTreeMap;

use super::PhotonicsError;

/// n! for the photon numbers that can appear here.
const FACTORIAL: [f64; 4] = [1.0, 1.0, 2.0, 6.0];

#[derive(Clone, Debug)]
pub struct FockState {
    n_modes: usize,
    budget: usize,
    terms: BTreeMap<Vec<u8>, Complex64>,
}

impl FockState {
    pub fn vacuum(n_modes: usize, budget: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0u8; n_modes], Complex64::new(1.0, 0.0));
        FockState {
            n_modes,
            budget,
            terms,
        }
    }

    /// Build a state from (occupation, amplitude) pairs. Amplitudes on the
    /// same occupation accumulate.
    pub fn from_terms(
        n_modes: usize,
        budget: usize,
        entries: impl IntoIterator<Item = (Vec<u8>, Complex64)>,
    ) -> Result<Self, PhotonicsError> {
        let mut terms: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        for (occ, amp) in entries {
            if occ.len() != n_modes {
                return Err(PhotonicsError::BadOccupation(format!(
                    "occupation has {} modes, state has {}",
                    occ.len(),
                    n_modes
                )));
            }
            let total: usize = occ.iter().map(|&n| n as usize).sum();
            if total > budget {
                return Err(PhotonicsError::PhotonBudgetExceeded {
                    photons: total,
                    budget,
                });
            }
            *terms.entry(occ).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        Ok(FockState {
            n_modes,
            budget,
            terms,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn photon_budget(&self) -> usize {
        self.budget
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, occ: &[u8]) -> Complex64 {
        self.terms
            .get(occ)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// Apply a unitary mixing of two modes by creation-operator
    /// substitution: a†_{m0} → u[0][0] a†_{m0} + u[1][0] a†_{m1} and
    /// a†_{m1} → u[0][1] a†_{m0} + u[1][1] a†_{m1}.
    pub fn apply_two_mode(&self, m0: usize, m1: usize, u: [[Complex64; 2]; 2]) -> FockState {
        debug_assert!(m0 < self.n_modes && m1 < self.n_modes && m0 != m1);
        let mut out: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        for (occ, &amp) in &self.terms {
            let n0 = occ[m0] as usize;
            let n1 = occ[m1] as usize;
            if n0 + n1 == 0 {
                *out.entry(occ.clone()).or_insert(Complex64::new(0.0, 0.0)) += amp;
                continue;
            }
            // monomial coefficient of (a†_{m0})^{n0} (a†_{m1})^{n1} |0..⟩
            let base = amp / (FACTORIAL[n0] * FACTORIAL[n1]).sqrt();
            for j in 0..=n0 {
                for k in 0..=n1 {
                    // j photons of the first factor and k of the second end
                    // up in m0; the rest go to m1
                    let into_m0 = j + k;
                    let into_m1 = n0 + n1 - into_m0;
                    let coeff = base
                        * binomial(n0, j)
                        * binomial(n1, k)
                        * u[0][0].powu(j as u32)
                        * u[1][0].powu((n0 - j) as u32)
                        * u[0][1].powu(k as u32)
                        * u[1][1].powu((n1 - k) as u32)
                        * (FACTORIAL[into_m0] * FACTORIAL[into_m1]).sqrt();
                    if coeff.norm_sqr() == 0.0 {
                        continue;
                    }
                    let mut new_occ = occ.clone();
                    new_occ[m0] = into_m0 as u8;
                    new_occ[m1] = into_m1 as u8;
                    *out.entry(new_occ).or_insert(Complex64::new(0.0, 0.0)) += coeff;
                }
            }
        }
        out.retain(|_, a| a.norm_sqr() > 0.0);
        FockState {
            n_modes: self.n_modes,
            budget: self.budget,
            terms: out,
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    FACTORIAL[n] / (FACTORIAL[k] * FACTORIAL[n - k])
}
