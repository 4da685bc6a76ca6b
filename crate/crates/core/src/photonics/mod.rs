//! Second-quantized linear-optics model of the proposed experiment.
//!
//! An entangled photon pair cosθ|HH⟩_AB + sinθ|VV⟩_AB and a diagonal
//! photon (|H⟩_C + |V⟩_C)/√2 enter a beam-splitter network. Conditioned on
//! one photon appearing at each monitored output port, the three-photon
//! polarization state is the paired three-qubit meter, with measurement
//! strength set by θ. Each photon then runs through a Mach-Zehnder
//! interferometer whose path plays the signal qubit: the path is
//! preselected in (|0⟩+|1⟩)/√2, a wave plate in path 1 flips the
//! polarization (a CNOT with the path as control), and the detector port
//! postselects the path in (|0⟩+i|1⟩)/√2. The conditional polarization
//! statistics must agree exactly with the abstract circuit model.

pub mod fock;
pub mod network;

use num_complex::Complex64;
use thiserror::Error;

use crate::qstate::{Ket, Label, QstateError};
use crate::weakmeas::{make_meter_on, MeterFamily, MeterSpec, ReadoutTable, WeakMeasError};
use fock::FockState;
pub use network::{default_network, parse_network, Element, Mode, ModeNetwork, Polarization};

/// Coincidence-conditioned states must match the paired-meter target with
/// at least this fidelity.
pub const FIDELITY_GATE: f64 = 1e-10;

/// Success probabilities at or below this floor count as no coincidences.
pub const COINCIDENCE_FLOOR: f64 = 1e-30;

#[derive(Debug, Error)]
pub enum PhotonicsError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("network schema: {0}")]
    Schema(String),
    #[error("unknown port `{0}`")]
    UnknownPort(String),
    #[error("beam-splitter transmissivity {0} outside the open interval (0, 1)")]
    TransmissivityOutOfRange(f64),
    #[error("occupation vector mismatch: {0}")]
    BadOccupation(String),
    #[error("term with {photons} photons exceeds the budget of {budget}")]
    PhotonBudgetExceeded { photons: usize, budget: usize },
    #[error("pair angle theta = {0} outside [0, pi/2]")]
    ThetaOutOfRange(f64),
    #[error("no coincidence amplitude survives postselection on the output ports")]
    NullCoincidence,
    #[error(
        "prepared conditional state misses the paired-meter target: fidelity {fidelity:.15} < 1 - {gate:.1e}"
    )]
    FidelityGate { fidelity: f64, gate: f64 },
    #[error("path postselection has zero success probability")]
    ZeroPathPostselection,
    #[error("network norm drifted: |norm^2 - 1| = {0:.3e}")]
    NormDrift(f64),
    #[error(transparent)]
    State(#[from] QstateError),
    #[error(transparent)]
    WeakMeas(#[from] WeakMeasError),
}

type Result<T> = std::result::Result<T, PhotonicsError>;

/// The pair-entanglement angle θ and everything derived from it.
///
/// α = (cosθ + sinθ)/(2√(1+2cos²θ)), β = (cosθ − sinθ)/(2√(1+2cos²θ)),
/// δ = √3·α, ε = (α + 2β)/√3, G = δ² − ε².
#[derive(Clone, Copy, Debug)]
pub struct OpticalMeterParams {
    theta: f64,
}

impl OpticalMeterParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(PhotonicsError::ThetaOutOfRange(theta));
        }
        Ok(OpticalMeterParams { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn alpha(&self) -> f64 {
        let (s, c) = self.theta.sin_cos();
        (c + s) / (2.0 * (1.0 + 2.0 * c * c).sqrt())
    }

    pub fn beta(&self) -> f64 {
        let (s, c) = self.theta.sin_cos();
        (c - s) / (2.0 * (1.0 + 2.0 * c * c).sqrt())
    }

    pub fn delta(&self) -> f64 {
        3.0f64.sqrt() * self.alpha()
    }

    pub fn epsilon(&self) -> f64 {
        (self.alpha() + 2.0 * self.beta()) / 3.0f64.sqrt()
    }

    /// G = δ² − ε² = 4(α − β)(2α + β)/3.
    ///
    /// Mathematically G lies in [0, 1] for θ in [0, π/2]; the clamp only
    /// absorbs floating-point roundoff at the endpoints.
    pub fn strength(&self) -> f64 {
        let d = self.delta();
        let e = self.epsilon();
        (d * d - e * e).clamp(0.0, 1.0)
    }
}

/// The three-photon input: cosθ|HH⟩_AB + sinθ|VV⟩_AB on the first two
/// input ports and (|H⟩+|V⟩)/√2 on the third.
pub fn input_state(params: &OpticalMeterParams, net: &ModeNetwork) -> Result<FockState> {
    let [a, b, c] = net.input_ports();
    let (ia, ib, ic) = (
        net.port_index(a)?,
        net.port_index(b)?,
        net.port_index(c)?,
    );
    let n = net.n_modes();
    let occupy = |pols: [(usize, Polarization); 3]| -> Vec<u8> {
        let mut occ = vec![0u8; n];
        for (port, pol) in pols {
            occ[net.mode_index(port, pol)] += 1;
        }
        occ
    };
    let (sin_t, cos_t) = params.theta().sin_cos();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    use Polarization::{H, V};
    let entries = [
        (occupy([(ia, H), (ib, H), (ic, H)]), cos_t * s),
        (occupy([(ia, H), (ib, H), (ic, V)]), cos_t * s),
        (occupy([(ia, V), (ib, V), (ic, H)]), sin_t * s),
        (occupy([(ia, V), (ib, V), (ic, V)]), sin_t * s),
    ];
    FockState::from_terms(
        n,
        3,
        entries
            .into_iter()
            .map(|(occ, amp)| (occ, Complex64::new(amp, 0.0))),
    )
}

/// Keep exactly the terms with one photon at each monitored output port
/// and nothing anywhere else; photons in loss ports disqualify a term.
/// Returns the normalized three-qubit polarization ket (H↦0, V↦1, labeled
/// by the output port names) and the success probability.
pub fn coincidence_project(state: &FockState, net: &ModeNetwork) -> Result<(Ket, f64)> {
    let outputs = net.output_ports();
    let out_idx: Vec<usize> = outputs
        .iter()
        .map(|p| net.port_index(p))
        .collect::<Result<_>>()?;
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    'term: for (occ, &amp) in state.terms() {
        let mut bits = 0usize;
        let mut in_outputs = 0usize;
        for (k, &port) in out_idx.iter().enumerate() {
            let nh = occ[net.mode_index(port, Polarization::H)];
            let nv = occ[net.mode_index(port, Polarization::V)];
            if nh + nv != 1 {
                continue 'term;
            }
            in_outputs += 1;
            bits |= (nv as usize) << (2 - k);
        }
        let total: usize = occ.iter().map(|&x| x as usize).sum();
        if total != in_outputs {
            continue; // photons left in loss or input ports
        }
        amps[bits] += amp;
    }
    let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if p <= COINCIDENCE_FLOOR {
        return Err(PhotonicsError::NullCoincidence);
    }
    let scale = p.sqrt();
    let labels: Vec<Label> = outputs.iter().map(|&s| Label::from(s)).collect();
    let ket = Ket::from_amplitudes(labels, amps.into_iter().map(|a| a / scale).collect())?;
    Ok((ket, p))
}

/// Run the preparation network end to end: build the three-photon input,
/// evolve it, coincidence-project on the output ports, and gate the result
/// on fidelity with the paired-meter target at G(θ). Returns the
/// conditional polarization ket and the coincidence probability.
pub fn prepare_meter(
    params: &OpticalMeterParams,
    net: &ModeNetwork,
) -> Result<(Ket, f64)> {
    let input = input_state(params, net)?;
    let evolved = net.evolve(&input)?;
    let drift = (evolved.norm_sqr() - 1.0).abs();
    if drift > 1e-12 {
        return Err(PhotonicsError::NormDrift(drift));
    }
    let (ket, p) = coincidence_project(&evolved, net)?;
    let spec = MeterSpec::new(MeterFamily::ThreeQubitPaired, params.strength())?;
    let target = make_meter_on(&spec, ket.labels().to_vec())?;
    let fidelity = target.inner(&ket)?.norm_sqr();
    if fidelity < 1.0 - FIDELITY_GATE {
        return Err(PhotonicsError::FidelityGate {
            fidelity,
            gate: FIDELITY_GATE,
        });
    }
    Ok((ket, p))
}

/// Send each photon of a three-qubit polarization ket through its
/// Mach-Zehnder interferometer and return the conditional polarization
/// distribution after every photon's path postselection succeeds.
///
/// The path of photon q is preselected in (|0⟩+|1⟩)/√2, a 45° wave plate
/// in path 1 flips its polarization, and the detector port postselects the
/// path in (|0⟩+i|1⟩)/√2. `strength` is recorded in the returned table.
pub fn mach_zehnder_stage(meter: &Ket, strength: f64) -> Result<ReadoutTable> {
    if meter.n_qubits() != 3 {
        return Err(PhotonicsError::BadOccupation(format!(
            "Mach-Zehnder stage expects a 3-qubit polarization ket, got {}",
            meter.n_qubits()
        )));
    }
    // ports q:0 / q:1 are the two interferometer paths of photon q
    let mut ports = Vec::with_capacity(9);
    for label in meter.labels() {
        ports.push(format!("{label}:0"));
        ports.push(format!("{label}:1"));
    }
    ports.push("sink:0".into());
    ports.push("sink:1".into());
    ports.push("sink:2".into());
    let inputs = [ports[0].clone(), ports[2].clone(), ports[4].clone()];
    let outputs = [ports[6].clone(), ports[7].clone(), ports[8].clone()];
    let mut net = ModeNetwork::new(ports, inputs, outputs)?;
    for label in meter.labels() {
        net.push_waveplate(45.0, &format!("{label}:1"))?;
    }

    let n = net.n_modes();
    let path_mode = |q: usize, path: usize, pol: Polarization| -> usize {
        net.mode_index(2 * q + path, pol)
    };
    let pol_of = |bit: usize| if bit == 0 { Polarization::H } else { Polarization::V };

    // each photon enters its interferometer in the path state (|0⟩+|1⟩)/√2
    let split = 1.0 / 8.0f64.sqrt();
    let mut entries = Vec::with_capacity(64);
    for tau in 0..8usize {
        let amp = meter.amplitudes()[tau];
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        for paths in 0..8usize {
            let mut occ = vec![0u8; n];
            for q in 0..3 {
                let tau_q = (tau >> (2 - q)) & 1;
                let path_q = (paths >> (2 - q)) & 1;
                occ[path_mode(q, path_q, pol_of(tau_q))] += 1;
            }
            entries.push((occ, amp * split));
        }
    }
    let state = FockState::from_terms(n, 3, entries)?;
    let state = net.evolve(&state)?;

    // postselect each path on (|0⟩+i|1⟩)/√2: per-photon weights 1 on path 0
    // and −i on path 1, all divided by √8
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    let minus_i = Complex64::new(0.0, -1.0);
    for tau in 0..8usize {
        let mut acc = Complex64::new(0.0, 0.0);
        for paths in 0..8usize {
            let mut occ = vec![0u8; n];
            let mut weight = Complex64::new(split, 0.0);
            for q in 0..3 {
                let tau_q = (tau >> (2 - q)) & 1;
                let path_q = (paths >> (2 - q)) & 1;
                occ[path_mode(q, path_q, pol_of(tau_q))] += 1;
                if path_q == 1 {
                    weight *= minus_i;
                }
            }
            acc += weight * state.amplitude(&occ);
        }
        amps[tau] = acc;
    }
    let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if p <= COINCIDENCE_FLOOR {
        return Err(PhotonicsError::ZeroPathPostselection);
    }
    let post_labels: Vec<Label> = meter.labels().to_vec();
    let probs: Vec<f64> = amps.iter().map(|a| a.norm_sqr() / p).collect();
    Ok(ReadoutTable::from_parts(post_labels, probs, p, strength)?)
}
