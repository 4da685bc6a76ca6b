//! Weak and joint weak measurement in the circuit model.
//!
//! A meter register is prepared in one of the families below, coupled to the
//! signal through one CNOT per signal/meter pair (signal controls, meter is
//! flipped), and read out conditionally on a successful postselection of the
//! signal. The normalized readout `R = (ΣP − offset)/G` of the conditional
//! meter statistics converges to the real part of the corresponding (joint)
//! weak value as the measurement strength `G = δ² − ε²` goes to zero.
//!
//! Meter families and their normalizations (`n` meter qubits):
//!
//! | family      | state                                       | normalization     |
//! |-------------|---------------------------------------------|-------------------|
//! | `1q`        | δ|0⟩ + ε|1⟩                                 | δ² + ε² = 1       |
//! | `2q-full`   | δ|00⟩ + ε(|01⟩+|10⟩+|11⟩)                   | δ² + 3ε² = 1      |
//! | `2q-paired` | [δ(|00⟩+|11⟩) + ε(|01⟩+|10⟩)]/√2            | δ² + ε² = 1       |
//! | `3q-full`   | δ|000⟩ + ε·Σ_{x≠000}|x⟩                     | δ² + 7ε² = 1      |
//! | `3q-paired` | [δ(|000⟩+|111⟩) + ε·Σ_{x∉{000,111}}|x⟩]/√2  | δ² + 3ε² = 1      |
//! | `nq-full`   | δ|0..0⟩ + ε·Σ_{x≠0..0}|x⟩                   | δ² + (2ⁿ−1)ε² = 1 |
//!
//! The strength `G`, not the pair (δ, ε), is the public parameter; δ and ε
//! are derived per family. `G = 0` means no measurement (meter and signal
//! stay separable) and `G = 1` is a projective measurement. Negative or
//! super-unit strengths are rejected.

use crate::qstate::{labels, Ket, Label, Operator, QstateError};
use num_complex::Complex64;
use std::fmt;
use thiserror::Error;

/// Overlaps |⟨post|pre⟩| below this floor make the weak value undefined.
pub const OVERLAP_FLOOR: f64 = 1e-12;

/// Postselection success probabilities at or below this floor are treated
/// as a failed postselection.
pub const POSTSELECTION_FLOOR: f64 = 1e-30;

#[derive(Debug, Error)]
pub enum WeakMeasError {
    #[error(transparent)]
    State(#[from] QstateError),
    #[error("weak value undefined: |<post|pre>| = {overlap:.3e} below floor {floor:.3e}")]
    UndefinedWeakValue { overlap: f64, floor: f64 },
    #[error("operator pair is not projector + complement: {0}")]
    NotComplementaryProjectors(String),
    #[error("degenerate postselection: both ABL branches carry zero weight")]
    DegeneratePostselection,
    #[error("postselection on [{post}] has zero success probability")]
    ZeroPostselection { post: String },
    #[error("normalized readout is undefined at G = 0; use weak_value for the limit")]
    ZeroStrength,
    #[error("measurement strength G = {0} outside [0, 1]")]
    StrengthOutOfRange(f64),
    #[error("meter size n = {0} outside the supported range 1..=10")]
    MeterSizeOutOfRange(usize),
    #[error("pre- and postselection must live on the same labels")]
    PrePostLabelMismatch,
    #[error("pre- and postselection kets must be normalized")]
    NotNormalized,
    #[error("coupling pairs must pair distinct signal and meter labels: {0}")]
    BadPairing(String),
    #[error("outcome set: {0}")]
    BadOutcomeSet(String),
}

type Result<T> = std::result::Result<T, WeakMeasError>;

/// Which entangled meter state to prepare.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeterFamily {
    OneQubit,
    TwoQubitFull,
    TwoQubitPaired,
    ThreeQubitFull,
    ThreeQubitPaired,
    NQubitFull(usize),
}

impl MeterFamily {
    pub fn qubit_count(&self) -> usize {
        match self {
            MeterFamily::OneQubit => 1,
            MeterFamily::TwoQubitFull | MeterFamily::TwoQubitPaired => 2,
            MeterFamily::ThreeQubitFull | MeterFamily::ThreeQubitPaired => 3,
            MeterFamily::NQubitFull(n) => *n,
        }
    }
}

impl fmt::Display for MeterFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeterFamily::OneQubit => write!(f, "1q"),
            MeterFamily::TwoQubitFull => write!(f, "2q-full"),
            MeterFamily::TwoQubitPaired => write!(f, "2q-paired"),
            MeterFamily::ThreeQubitFull => write!(f, "3q-full"),
            MeterFamily::ThreeQubitPaired => write!(f, "3q-paired"),
            MeterFamily::NQubitFull(n) => write!(f, "{n}q-full"),
        }
    }
}

/// Measurement-strength parametrization of a meter family.
///
/// δ and ε are solved from `G = δ² − ε²` and the family normalization.
#[derive(Clone, Copy, Debug)]
pub struct MeterSpec {
    family: MeterFamily,
    strength: f64,
}

impl MeterSpec {
    pub fn new(family: MeterFamily, strength: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&strength) {
            return Err(WeakMeasError::StrengthOutOfRange(strength));
        }
        if let MeterFamily::NQubitFull(n) = family {
            if n == 0 || n > 10 {
                return Err(WeakMeasError::MeterSizeOutOfRange(n));
            }
        }
        Ok(MeterSpec { family, strength })
    }

    pub fn family(&self) -> MeterFamily {
        self.family
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    fn delta_sqr(&self) -> f64 {
        let g = self.strength;
        match self.family {
            MeterFamily::OneQubit | MeterFamily::TwoQubitPaired => (1.0 + g) / 2.0,
            MeterFamily::TwoQubitFull | MeterFamily::ThreeQubitPaired => (1.0 + 3.0 * g) / 4.0,
            MeterFamily::ThreeQubitFull => (1.0 + 7.0 * g) / 8.0,
            MeterFamily::NQubitFull(n) => {
                let d = (1u64 << n) as f64;
                (1.0 + (d - 1.0) * g) / d
            }
        }
    }

    fn epsilon_sqr(&self) -> f64 {
        let g = self.strength;
        match self.family {
            MeterFamily::OneQubit | MeterFamily::TwoQubitPaired => (1.0 - g) / 2.0,
            MeterFamily::TwoQubitFull | MeterFamily::ThreeQubitPaired => (1.0 - g) / 4.0,
            MeterFamily::ThreeQubitFull => (1.0 - g) / 8.0,
            MeterFamily::NQubitFull(n) => (1.0 - g) / (1u64 << n) as f64,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta_sqr().sqrt()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon_sqr().sqrt()
    }

    /// The readout offset for a single-outcome (full meter) or single
    /// complementary-pair (paired meter) outcome set: ε².
    pub fn readout_offset(&self) -> f64 {
        self.epsilon_sqr()
    }
}

/// Build the meter ket of the requested family on labels `1..=n`.
pub fn make_meter(spec: &MeterSpec) -> Result<Ket> {
    let n = spec.family().qubit_count();
    let meter_labels: Vec<Label> = (1..=n).map(|i| Label::new(i.to_string())).collect();
    make_meter_on(spec, meter_labels)
}

/// Build the meter ket of the requested family on explicit labels.
pub fn make_meter_on(spec: &MeterSpec, meter_labels: Vec<Label>) -> Result<Ket> {
    let n = spec.family().qubit_count();
    if meter_labels.len() != n {
        return Err(WeakMeasError::BadPairing(format!(
            "family {} needs {} labels, got {}",
            spec.family(),
            n,
            meter_labels.len()
        )));
    }
    let dim = 1usize << n;
    let delta = spec.delta();
    let eps = spec.epsilon();
    let amps: Vec<Complex64> = match spec.family() {
        MeterFamily::OneQubit
        | MeterFamily::TwoQubitFull
        | MeterFamily::ThreeQubitFull
        | MeterFamily::NQubitFull(_) => (0..dim)
            .map(|i| Complex64::new(if i == 0 { delta } else { eps }, 0.0))
            .collect(),
        MeterFamily::TwoQubitPaired | MeterFamily::ThreeQubitPaired => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            (0..dim)
                .map(|i| {
                    let v = if i == 0 || i == dim - 1 { delta } else { eps };
                    Complex64::new(v * s, 0.0)
                })
                .collect()
        }
    };
    Ok(Ket::from_amplitudes(meter_labels, amps)?)
}

/// A preselection and a postselection on the same signal register.
#[derive(Clone, Debug)]
pub struct PrePost {
    pre: Ket,
    post: Ket,
}

impl PrePost {
    pub fn new(pre: Ket, post: Ket) -> Result<Self> {
        if !pre.is_normalized(crate::qstate::DEFAULT_TOL)
            || !post.is_normalized(crate::qstate::DEFAULT_TOL)
        {
            return Err(WeakMeasError::NotNormalized);
        }
        let mut a: Vec<&Label> = pre.labels().iter().collect();
        let mut b: Vec<&Label> = post.labels().iter().collect();
        a.sort();
        b.sort();
        if a != b {
            return Err(WeakMeasError::PrePostLabelMismatch);
        }
        Ok(PrePost { pre, post })
    }

    pub fn pre(&self) -> &Ket {
        &self.pre
    }

    pub fn post(&self) -> &Ket {
        &self.post
    }

    /// ⟨post|pre⟩.
    pub fn overlap(&self) -> Complex64 {
        self.post.inner(&self.pre).expect("labels validated")
    }
}

/// The weak value ⟨f|A|i⟩ / ⟨f|i⟩.
pub fn weak_value(pp: &PrePost, op: &Operator) -> Result<Complex64> {
    let denom = pp.overlap();
    if denom.norm() <= OVERLAP_FLOOR {
        return Err(WeakMeasError::UndefinedWeakValue {
            overlap: denom.norm(),
            floor: OVERLAP_FLOOR,
        });
    }
    let num = pp.post.inner(&op.apply(&pp.pre)?)?;
    Ok(num / denom)
}

/// The Aharonov-Bergmann-Lebowitz probability of the `proj` outcome for a
/// two-outcome projective measurement performed between pre- and
/// postselection:
///
/// |⟨f|P|i⟩|² / (|⟨f|P|i⟩|² + |⟨f|(1−P)|i⟩|²)
pub fn abl_probability(pp: &PrePost, proj: &Operator, complement: &Operator) -> Result<f64> {
    let tol = crate::qstate::DEFAULT_TOL;
    if !proj.is_projector(tol) {
        return Err(WeakMeasError::NotComplementaryProjectors(format!(
            "first operator deviates from a projector by {:.3e}",
            proj.projector_deviation()
        )));
    }
    if !complement.is_projector(tol) {
        return Err(WeakMeasError::NotComplementaryProjectors(format!(
            "second operator deviates from a projector by {:.3e}",
            complement.projector_deviation()
        )));
    }
    let id = Operator::identity(proj.labels().to_vec())?;
    let dev = proj.add(complement)?.max_abs_diff(&id)?;
    if dev > tol {
        return Err(WeakMeasError::NotComplementaryProjectors(format!(
            "sum deviates from the identity by {dev:.3e}"
        )));
    }
    let branch = |op: &Operator| -> Result<f64> {
        Ok(pp.post.inner(&op.apply(&pp.pre)?)?.norm_sqr())
    };
    let kept = branch(proj)?;
    let lost = branch(complement)?;
    if kept + lost <= POSTSELECTION_FLOOR {
        return Err(WeakMeasError::DegeneratePostselection);
    }
    Ok(kept / (kept + lost))
}

/// Couple signal and meter with one CNOT per pair (signal = control,
/// meter = target) and return the joint ket.
pub fn couple(signal: &Ket, meter: &Ket, pairs: &[(Label, Label)]) -> Result<Ket> {
    let mut seen_signal: Vec<&Label> = Vec::new();
    let mut seen_meter: Vec<&Label> = Vec::new();
    for (s, m) in pairs {
        if !signal.labels().contains(s) {
            return Err(WeakMeasError::BadPairing(format!(
                "`{s}` is not a signal label"
            )));
        }
        if !meter.labels().contains(m) {
            return Err(WeakMeasError::BadPairing(format!(
                "`{m}` is not a meter label"
            )));
        }
        if seen_signal.contains(&s) || seen_meter.contains(&m) {
            return Err(WeakMeasError::BadPairing(format!(
                "label reuse in pair ({s}, {m})"
            )));
        }
        seen_signal.push(s);
        seen_meter.push(m);
    }
    let mut joint = signal.tensor(meter)?;
    for (s, m) in pairs {
        joint = Operator::cnot(s.clone(), m.clone())?.apply(&joint)?;
    }
    Ok(joint)
}

/// Conditional meter statistics after a successful postselection.
#[derive(Clone, Debug)]
pub struct ReadoutTable {
    meter_labels: Vec<Label>,
    probs: Vec<f64>,
    success_probability: f64,
    strength: f64,
}

impl ReadoutTable {
    /// Assemble a table from already-conditioned probabilities. Entries
    /// must form a distribution over all 2^n meter bitstrings.
    pub(crate) fn from_parts(
        meter_labels: Vec<Label>,
        probs: Vec<f64>,
        success_probability: f64,
        strength: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&strength) {
            return Err(WeakMeasError::StrengthOutOfRange(strength));
        }
        if probs.len() != 1 << meter_labels.len() {
            return Err(WeakMeasError::BadOutcomeSet(format!(
                "{} probabilities for {} meter qubits",
                probs.len(),
                meter_labels.len()
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 || probs.iter().any(|&p| !(0.0..=1.0 + 1e-12).contains(&p))
        {
            return Err(WeakMeasError::BadOutcomeSet(format!(
                "entries do not form a distribution (sum {total})"
            )));
        }
        Ok(ReadoutTable {
            meter_labels,
            probs,
            success_probability,
            strength,
        })
    }

    pub fn meter_labels(&self) -> &[Label] {
        &self.meter_labels
    }

    pub fn n_outcomes(&self) -> usize {
        self.probs.len()
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn success_probability(&self) -> f64 {
        self.success_probability
    }

    pub fn probability(&self, bits: &str) -> Result<f64> {
        Ok(self.probs[self.outcome_index(bits)?])
    }

    fn outcome_index(&self, bits: &str) -> Result<usize> {
        let n = self.meter_labels.len();
        if bits.len() != n || !bits.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(WeakMeasError::BadOutcomeSet(format!(
                "`{bits}` is not a {n}-bit outcome"
            )));
        }
        Ok(bits
            .bytes()
            .fold(0usize, |acc, b| (acc << 1) | usize::from(b == b'1')))
    }

    /// Outcomes in basis order together with their bitstrings.
    pub fn iter(&self) -> impl Iterator<Item = (String, f64)> + '_ {
        let n = self.meter_labels.len();
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (crate::qstate::index_to_bits(i, n), p))
    }
}

/// Project the signal register of `joint` onto `post` and return the
/// conditional distribution over meter bitstrings.
///
/// `strength` is recorded in the table for later readout normalization; it
/// plays no role in the conditioning itself.
pub fn meter_distribution(joint: &Ket, post: &Ket, strength: f64) -> Result<ReadoutTable> {
    if !(0.0..=1.0).contains(&strength) {
        return Err(WeakMeasError::StrengthOutOfRange(strength));
    }
    let (meter_ket, p) = joint.condition_on(post)?;
    if p <= POSTSELECTION_FLOOR {
        return Err(WeakMeasError::ZeroPostselection {
            post: post
                .labels()
                .iter()
                .map(Label::as_str)
                .collect::<Vec<_>>()
                .join(","),
        });
    }
    let probs: Vec<f64> = meter_ket
        .amplitudes()
        .iter()
        .map(|a| a.norm_sqr() / p)
        .collect();
    debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    Ok(ReadoutTable {
        meter_labels: meter_ket.labels().to_vec(),
        probs,
        success_probability: p,
        strength,
    })
}

/// Normalized readout: (Σ over `outcomes` of P_m − `subtracted`) / G.
///
/// The offset is ε² for a single full-meter outcome or one complementary
/// pair on a paired meter, and 2ε² when two complementary pairs are
/// combined into a same-path projector readout.
pub fn readout(table: &ReadoutTable, outcomes: &[&str], subtracted: f64) -> Result<f64> {
    if table.strength == 0.0 {
        return Err(WeakMeasError::ZeroStrength);
    }
    if outcomes.is_empty() {
        return Err(WeakMeasError::BadOutcomeSet("empty outcome set".into()));
    }
    let mut seen = Vec::with_capacity(outcomes.len());
    let mut total = 0.0;
    for bits in outcomes {
        let idx = table.outcome_index(bits)?;
        if seen.contains(&idx) {
            return Err(WeakMeasError::BadOutcomeSet(format!(
                "duplicate outcome `{bits}`"
            )));
        }
        seen.push(idx);
        total += table.probs[idx];
    }
    Ok((total - subtracted) / table.strength)
}

/// The pair (Π̂ˢᵃᵐᵉ, Π̂ᵈⁱᶠᶠ) on two signal qubits: |00⟩⟨00|+|11⟩⟨11| and its
/// complement |01⟩⟨01|+|10⟩⟨10|.
pub fn pigeonhole_projectors(a: &Label, b: &Label) -> Result<(Operator, Operator)> {
    if a == b {
        return Err(WeakMeasError::State(QstateError::DuplicateLabel(a.clone())));
    }
    let pair = vec![a.clone(), b.clone()];
    let same = Operator::projector("00", pair.clone())?
        .add(&Operator::projector("11", pair.clone())?)?;
    let diff = Operator::projector("01", pair.clone())?
        .add(&Operator::projector("10", pair)?)?;
    Ok((same, diff))
}

/// The three-photon pigeonhole pre/postselection and its projector pairs.
pub mod pigeonhole {
    use super::*;

    pub fn signal_labels() -> Vec<Label> {
        labels(["I", "II", "III"])
    }

    /// |i⟩ = [(|0⟩+|1⟩)/√2]^⊗3.
    pub fn preselection() -> Ket {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        product_state(
            &signal_labels(),
            Complex64::new(h, 0.0),
            Complex64::new(h, 0.0),
        )
    }

    /// |f⟩ = [(|0⟩+i|1⟩)/√2]^⊗3.
    pub fn postselection() -> Ket {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        product_state(
            &signal_labels(),
            Complex64::new(h, 0.0),
            Complex64::new(0.0, h),
        )
    }

    pub fn prepost() -> PrePost {
        PrePost::new(preselection(), postselection()).expect("pigeonhole states are normalized")
    }

    /// The three photon pairs, in the order I-II, II-III, III-I.
    pub fn pairs() -> [(Label, Label); 3] {
        let l = signal_labels();
        [
            (l[0].clone(), l[1].clone()),
            (l[1].clone(), l[2].clone()),
            (l[2].clone(), l[0].clone()),
        ]
    }

    fn product_state(qubits: &[Label], a0: Complex64, a1: Complex64) -> Ket {
        qubits
            .iter()
            .map(|l| Ket::qubit(l.clone(), a0, a1))
            .reduce(|acc, q| acc.tensor(&q).expect("distinct labels"))
            .expect("nonempty register")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn qubit_pp(pre: (f64, f64, f64, f64), post: (f64, f64, f64, f64)) -> PrePost {
        PrePost::new(
            Ket::qubit("I", c(pre.0, pre.1), c(pre.2, pre.3)),
            Ket::qubit("I", c(post.0, post.1), c(post.2, post.3)),
        )
        .unwrap()
    }

    fn one_qubit_pigeonhole() -> PrePost {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        qubit_pp((h, 0.0, h, 0.0), (h, 0.0, 0.0, h))
    }

    #[test]
    fn weak_value_of_same_projector_vanishes() {
        let pp = pigeonhole::prepost();
        for (a, b) in pigeonhole::pairs() {
            let (same, _) = pigeonhole_projectors(&a, &b).unwrap();
            let wv = weak_value(&pp, &same).unwrap();
            assert!(wv.norm() < TOL, "pair ({a},{b}): {wv}");
        }
    }

    #[test]
    fn weak_value_of_identity_is_one() {
        let pp = pigeonhole::prepost();
        let id = Operator::identity(pigeonhole::signal_labels()).unwrap();
        let wv = weak_value(&pp, &id).unwrap();
        assert!((wv - c(1.0, 0.0)).norm() < TOL);
    }

    #[test]
    fn weak_value_single_qubit_hand_value() {
        // pre (|0⟩+|1⟩)/√2, post (|0⟩+i|1⟩)/√2, A = |0⟩⟨0| → (1+i)/2.
        let pp = one_qubit_pigeonhole();
        let p0 = Operator::projector("0", labels(["I"])).unwrap();
        let wv = weak_value(&pp, &p0).unwrap();
        assert!((wv - c(0.5, 0.5)).norm() < TOL);
    }

    #[test]
    fn weak_value_rejects_orthogonal_prepost() {
        let pp = qubit_pp((1.0, 0.0, 0.0, 0.0), (0.0, 0.0, 1.0, 0.0));
        let p0 = Operator::projector("0", labels(["I"])).unwrap();
        assert!(matches!(
            weak_value(&pp, &p0),
            Err(WeakMeasError::UndefinedWeakValue { .. })
        ));
    }

    #[test]
    fn abl_probability_pigeonhole_is_zero() {
        let pp = pigeonhole::prepost();
        for (a, b) in pigeonhole::pairs() {
            let (same, diff) = pigeonhole_projectors(&a, &b).unwrap();
            let p = abl_probability(&pp, &same, &diff).unwrap();
            assert!(p.abs() < TOL, "pair ({a},{b}): {p}");
        }
    }

    #[test]
    fn abl_probability_trivial_and_balanced() {
        let pp = qubit_pp((1.0, 0.0, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0));
        let p0 = Operator::projector("0", labels(["I"])).unwrap();
        let p1 = Operator::projector("1", labels(["I"])).unwrap();
        assert!((abl_probability(&pp, &p0, &p1).unwrap() - 1.0).abs() < TOL);

        // both branch magnitudes equal 1/4 for the 1-qubit pigeonhole pp
        let pp = one_qubit_pigeonhole();
        assert!((abl_probability(&pp, &p0, &p1).unwrap() - 0.5).abs() < TOL);
    }

    #[test]
    fn abl_rejects_non_complementary_pair() {
        let pp = one_qubit_pigeonhole();
        let p0 = Operator::projector("0", labels(["I"])).unwrap();
        assert!(matches!(
            abl_probability(&pp, &p0, &p0),
            Err(WeakMeasError::NotComplementaryProjectors(_))
        ));
    }

    #[test]
    fn make_meter_strong_full_meter_is_all_zeros_ket() {
        let spec = MeterSpec::new(MeterFamily::TwoQubitFull, 1.0).unwrap();
        let m = make_meter(&spec).unwrap();
        assert!((m.amp("00").unwrap() - c(1.0, 0.0)).norm() < TOL);
        for bits in ["01", "10", "11"] {
            assert!(m.amp(bits).unwrap().norm() < TOL);
        }
    }

    #[test]
    fn make_meter_paired_weak_limit_is_uniform() {
        let spec = MeterSpec::new(MeterFamily::ThreeQubitPaired, 0.0).unwrap();
        let m = make_meter(&spec).unwrap();
        let want = 1.0 / 8.0f64.sqrt();
        for i in 0..8 {
            assert!((m.amplitudes()[i] - c(want, 0.0)).norm() < TOL);
        }
    }

    #[test]
    fn make_meter_two_qubit_paired_midstrength() {
        let spec = MeterSpec::new(MeterFamily::TwoQubitPaired, 0.5).unwrap();
        assert!((spec.delta() * spec.delta() - 0.75).abs() < TOL);
        assert!((spec.epsilon() * spec.epsilon() - 0.25).abs() < TOL);
        let m = make_meter(&spec).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m.amp("00").unwrap() - c(spec.delta() * s, 0.0)).norm() < TOL);
        assert!((m.amp("01").unwrap() - c(spec.epsilon() * s, 0.0)).norm() < TOL);
        assert!(m.is_normalized(TOL));
    }

    #[test]
    fn make_meter_rejects_bad_strength() {
        assert!(matches!(
            MeterSpec::new(MeterFamily::OneQubit, 1.5),
            Err(WeakMeasError::StrengthOutOfRange(_))
        ));
        assert!(matches!(
            MeterSpec::new(MeterFamily::OneQubit, -0.1),
            Err(WeakMeasError::StrengthOutOfRange(_))
        ));
    }

    #[test]
    fn meter_normalization_identities_hold_per_family() {
        let families = [
            MeterFamily::OneQubit,
            MeterFamily::TwoQubitFull,
            MeterFamily::TwoQubitPaired,
            MeterFamily::ThreeQubitFull,
            MeterFamily::ThreeQubitPaired,
            MeterFamily::NQubitFull(4),
            MeterFamily::NQubitFull(5),
        ];
        for family in families {
            for g in [0.0, 0.01, 0.3, 2.0 / 3.0, 0.9, 1.0] {
                let spec = MeterSpec::new(family, g).unwrap();
                let (d2, e2) = (spec.delta() * spec.delta(), spec.epsilon() * spec.epsilon());
                assert!((d2 - e2 - g).abs() < TOL, "{family} G={g}");
                let k = match family {
                    MeterFamily::OneQubit | MeterFamily::TwoQubitPaired => 1.0,
                    MeterFamily::TwoQubitFull | MeterFamily::ThreeQubitPaired => 3.0,
                    MeterFamily::ThreeQubitFull => 7.0,
                    MeterFamily::NQubitFull(n) => ((1u64 << n) - 1) as f64,
                };
                assert!((d2 + k * e2 - 1.0).abs() < TOL, "{family} G={g}");
                assert!(spec.epsilon() <= spec.delta() + TOL);
                assert!(spec.delta() <= 1.0 + TOL);
                assert!(
                    make_meter(&spec).unwrap().is_normalized(TOL),
                    "{family} G={g}"
                );
            }
        }
    }

    #[test]
    fn couple_strong_meter_correlates_exactly() {
        let a0 = c(0.6, 0.0);
        let a1 = c(0.0, 0.8);
        let signal = Ket::qubit("I", a0, a1);
        let meter = make_meter(&MeterSpec::new(MeterFamily::OneQubit, 1.0).unwrap()).unwrap();
        let joint = couple(&signal, &meter, &[("I".into(), "1".into())]).unwrap();
        assert!((joint.amp("00").unwrap() - a0).norm() < TOL);
        assert!((joint.amp("11").unwrap() - a1).norm() < TOL);
        assert!(joint.amp("01").unwrap().norm() < TOL);
        assert!(joint.amp("10").unwrap().norm() < TOL);
    }

    #[test]
    fn couple_zero_strength_meter_stays_separable() {
        let signal = pigeonhole::preselection();
        let meter =
            make_meter(&MeterSpec::new(MeterFamily::ThreeQubitPaired, 0.0).unwrap()).unwrap();
        let pairs: Vec<(Label, Label)> = pigeonhole::signal_labels()
            .into_iter()
            .zip(meter.labels().to_vec())
            .collect();
        let joint = couple(&signal, &meter, &pairs).unwrap();
        let product = signal.tensor(&meter).unwrap();
        for i in 0..joint.dim() {
            assert!((joint.amplitudes()[i] - product.amplitudes()[i]).norm() < TOL);
        }
    }

    #[test]
    fn couple_rejects_label_reuse() {
        let signal = Ket::qubit("I", c(1.0, 0.0), c(0.0, 0.0));
        let meter = make_meter(&MeterSpec::new(MeterFamily::TwoQubitFull, 0.5).unwrap()).unwrap();
        let err = couple(
            &signal,
            &meter,
            &[("I".into(), "1".into()), ("I".into(), "2".into())],
        );
        assert!(matches!(err, Err(WeakMeasError::BadPairing(_))));
    }

    #[test]
    fn one_qubit_pigeonhole_distribution_is_balanced_for_any_strength() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let pre = Ket::qubit("I", c(h, 0.0), c(h, 0.0));
        let post = Ket::qubit("I", c(h, 0.0), c(0.0, h));
        for g in [0.01, 0.2, 0.5, 0.9, 1.0] {
            let meter = make_meter(&MeterSpec::new(MeterFamily::OneQubit, g).unwrap()).unwrap();
            let joint = couple(&pre, &meter, &[("I".into(), "1".into())]).unwrap();
            let table = meter_distribution(&joint, &post, g).unwrap();
            assert!((table.probability("0").unwrap() - 0.5).abs() < TOL);
            assert!((table.probability("1").unwrap() - 0.5).abs() < TOL);
            assert!((table.success_probability() - 0.5).abs() < TOL);
        }
    }

    #[test]
    fn distribution_rejects_orthogonal_postselection() {
        let pre = Ket::qubit("I", c(1.0, 0.0), c(0.0, 0.0));
        let post = Ket::qubit("I", c(0.0, 0.0), c(1.0, 0.0));
        let meter = make_meter(&MeterSpec::new(MeterFamily::OneQubit, 1.0).unwrap()).unwrap();
        let joint = couple(&pre, &meter, &[("I".into(), "1".into())]).unwrap();
        assert!(matches!(
            meter_distribution(&joint, &post, 1.0),
            Err(WeakMeasError::ZeroPostselection { .. })
        ));
    }

    #[test]
    fn one_qubit_readout_equals_half_for_every_strength() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let pre = Ket::qubit("I", c(h, 0.0), c(h, 0.0));
        let post = Ket::qubit("I", c(h, 0.0), c(0.0, h));
        for g in [0.05, 0.2, 0.5, 1.0] {
            let spec = MeterSpec::new(MeterFamily::OneQubit, g).unwrap();
            let joint =
                couple(&pre, &make_meter(&spec).unwrap(), &[("I".into(), "1".into())]).unwrap();
            let table = meter_distribution(&joint, &post, g).unwrap();
            let r = readout(&table, &["0"], spec.readout_offset()).unwrap();
            assert!((r - 0.5).abs() < TOL, "G={g}: {r}");
        }
    }

    #[test]
    fn readout_refuses_zero_strength() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let pre = Ket::qubit("I", c(h, 0.0), c(h, 0.0));
        let post = Ket::qubit("I", c(h, 0.0), c(0.0, h));
        let joint = couple(
            &pre,
            &make_meter(&MeterSpec::new(MeterFamily::OneQubit, 0.0).unwrap()).unwrap(),
            &[("I".into(), "1".into())],
        )
        .unwrap();
        let table = meter_distribution(&joint, &post, 0.0).unwrap();
        assert!(matches!(
            readout(&table, &["0"], 0.5),
            Err(WeakMeasError::ZeroStrength)
        ));
    }

    #[test]
    fn paired_readout_converges_to_joint_weak_value_sums() {
        // For the pigeonhole pre/post the pair weak-value sums are
        // W(000)+W(111) = −1/2 and +1/2 for each of the three single-flip
        // pairs. Closed forms at finite G:
        //   R(000,111) = (δ − 5ε) / (4(δ + ε))
        //   R(001,110) = (δ + 3ε) / (4(δ + ε))
        let pp = pigeonhole::prepost();
        for g in [0.5, 0.2, 0.1, 0.05, 0.01] {
            let spec = MeterSpec::new(MeterFamily::ThreeQubitPaired, g).unwrap();
            let meter = make_meter(&spec).unwrap();
            let pairs: Vec<(Label, Label)> = pigeonhole::signal_labels()
                .into_iter()
                .zip(meter.labels().to_vec())
                .collect();
            let joint = couple(pp.pre(), &meter, &pairs).unwrap();
            let table = meter_distribution(&joint, pp.post(), g).unwrap();
            let (d, e) = (spec.delta(), spec.epsilon());
            let r_same = readout(&table, &["000", "111"], spec.readout_offset()).unwrap();
            assert!((r_same - (d - 5.0 * e) / (4.0 * (d + e))).abs() < TOL);
            let r_flip = readout(&table, &["001", "110"], spec.readout_offset()).unwrap();
            assert!((r_flip - (d + 3.0 * e) / (4.0 * (d + e))).abs() < TOL);
            // linear approach to the weak-value limits
            assert!((r_same - (-0.5)).abs() <= 1.1 * g);
            assert!((r_flip - 0.5).abs() <= 1.1 * g);
        }
    }

    #[test]
    fn combined_readout_approaches_zero() {
        // R(000,111) + R(001,110) with a 2ε² offset tends to ⟨Π̂ˢᵃᵐᵉ⟩_w = 0.
        let pp = pigeonhole::prepost();
        let mut last = f64::INFINITY;
        for g in [0.5, 0.2, 0.1, 0.05, 0.01] {
            let spec = MeterSpec::new(MeterFamily::ThreeQubitPaired, g).unwrap();
            let meter = make_meter(&spec).unwrap();
            let pairs: Vec<(Label, Label)> = pigeonhole::signal_labels()
                .into_iter()
                .zip(meter.labels().to_vec())
                .collect();
            let joint = couple(pp.pre(), &meter, &pairs).unwrap();
            let table = meter_distribution(&joint, pp.post(), g).unwrap();
            let r = readout(
                &table,
                &["000", "111", "001", "110"],
                2.0 * spec.readout_offset(),
            )
            .unwrap();
            assert!(r.abs() < last, "|R| should shrink with G");
            let (d, e) = (spec.delta(), spec.epsilon());
            assert!((r - (d - e) / (2.0 * (d + e))).abs() < TOL);
            last = r.abs();
        }
        assert!(last < 6e-3);
    }

    #[test]
    fn pigeonhole_projector_forms() {
        let (a, b) = (&Label::from("I"), &Label::from("II"));
        let (same, diff) = pigeonhole_projectors(a, b).unwrap();
        let want_same = Operator::projector("00", labels(["I", "II"]))
            .unwrap()
            .add(&Operator::projector("11", labels(["I", "II"])).unwrap())
            .unwrap();
        assert!(same.max_abs_diff(&want_same).unwrap() < TOL);
        let id = Operator::identity(labels(["I", "II"])).unwrap();
        assert!(same.add(&diff).unwrap().max_abs_diff(&id).unwrap() < TOL);
        assert!(pigeonhole_projectors(a, a).is_err());
    }

    #[test]
    fn weak_value_is_additive_over_projector_sums() {
        let pp = pigeonhole::prepost();
        let pair = labels(["I", "II"]);
        let p00 = Operator::projector("00", pair.clone()).unwrap();
        let p11 = Operator::projector("11", pair).unwrap();
        let sum_op = p00.add(&p11).unwrap();
        let lhs = weak_value(&pp, &sum_op).unwrap();
        let rhs = weak_value(&pp, &p00).unwrap() + weak_value(&pp, &p11).unwrap();
        assert!((lhs - rhs).norm() < TOL);
    }

    #[test]
    fn paired_weak_value_sums_match_frozen_hand_values() {
        // ⟨|000⟩⟨000|⟩_w + ⟨|111⟩⟨111|⟩_w = −1/2 on the pigeonhole pp, and
        // each complementary single-flip pair sums to +1/2.
        let pp = pigeonhole::prepost();
        let sig = pigeonhole::signal_labels();
        let pair_value = |bits: &str| -> f64 {
            let flipped: String = bits
                .chars()
                .map(|ch| if ch == '0' { '1' } else { '0' })
                .collect();
            let p = Operator::projector(bits, sig.clone())
                .unwrap()
                .add(&Operator::projector(&flipped, sig.clone()).unwrap())
                .unwrap();
            let wv = weak_value(&pp, &p).unwrap();
            assert!(wv.im.abs() < TOL);
            wv.re
        };
        assert!((pair_value("000") + 0.5).abs() < TOL);
        for bits in ["001", "010", "100"] {
            assert!((pair_value(bits) - 0.5).abs() < TOL, "pair {bits}");
        }
    }

    #[test]
    fn sum_rule_over_full_meter_outcomes() {
        let pp = pigeonhole::prepost();
        for g in [0.05, 0.3, 0.7, 1.0] {
            let spec = MeterSpec::new(MeterFamily::ThreeQubitFull, g).unwrap();
            let meter = make_meter(&spec).unwrap();
            let pairs: Vec<(Label, Label)> = pigeonhole::signal_labels()
                .into_iter()
                .zip(meter.labels().to_vec())
                .collect();
            let joint = couple(pp.pre(), &meter, &pairs).unwrap();
            let table = meter_distribution(&joint, pp.post(), g).unwrap();
            let total: f64 = (0..8)
                .map(|i| {
                    let bits = crate::qstate::index_to_bits(i, 3);
                    readout(&table, &[&bits], spec.readout_offset()).unwrap()
                })
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "G={g}: {total}");
        }
    }
}
