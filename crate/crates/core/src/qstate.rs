//! Dense complex state vectors and operators over small registers of
//! labeled qubits.
//!
//! Qubits are identified by [`Label`]s (signal qubits `I`, `II`, `III`;
//! meter qubits `1`, `2`, `3`, ...). Amplitudes are ordered
//! lexicographically by bitstring over the declared label order, with the
//! **first label as the most significant bit**: a register `[I, II]` stores
//! the amplitude of |01⟩ (I in 0, II in 1) at index `0b01 = 1`.
//!
//! Kets and operators are value-like and immutable once constructed; every
//! operation returns a fresh value. Operators act on a subset of a ket's
//! labels and are extended by the identity elsewhere.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use std::fmt;
use thiserror::Error;

/// Default absolute tolerance for structural checks (normalization,
/// projector and unitary tests). Everything here is exact dense arithmetic
/// in at most a few thousand dimensions, so near machine precision holds.
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum QstateError {
    #[error("duplicate qubit label `{0}`")]
    DuplicateLabel(Label),
    #[error("unknown qubit label `{0}`")]
    UnknownLabel(Label),
    #[error("label sets do not match: {0}")]
    LabelMismatch(String),
    #[error("amplitude vector has length {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("matrix has shape {rows}x{cols}, expected square of dimension {expected}")]
    BadMatrixShape {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("bitstring `{bits}` does not address {n} qubit(s)")]
    BadBitstring { bits: String, n: usize },
    #[error("control and target must differ, got `{0}` twice")]
    EqualLabels(Label),
    #[error("cannot normalize a ket with zero norm")]
    ZeroNorm,
}

/// Identifier of a single qubit within a register.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Self {
        Label(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label(s.to_owned())
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label(s)
    }
}

/// Convenience constructor for a list of labels.
pub fn labels<const N: usize>(names: [&str; N]) -> Vec<Label> {
    names.iter().map(|&n| Label::from(n)).collect()
}

fn check_unique(labels: &[Label]) -> Result<(), QstateError> {
    for (i, l) in labels.iter().enumerate() {
        if labels[i + 1..].contains(l) {
            return Err(QstateError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

fn bits_to_index(bits: &str, n: usize) -> Result<usize, QstateError> {
    if bits.len() != n || !bits.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(QstateError::BadBitstring {
            bits: bits.to_owned(),
            n,
        });
    }
    Ok(bits
        .bytes()
        .fold(0usize, |acc, b| (acc << 1) | usize::from(b == b'1')))
}

/// Render a basis index as a bitstring of width `n` (first label = MSB).
pub fn index_to_bits(index: usize, n: usize) -> String {
    (0..n)
        .map(|k| if (index >> (n - 1 - k)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Scatter the bits of `value` (a `k`-bit pattern, MSB first) onto the given
/// bit shifts of a wider index.
fn spread(value: usize, shifts: &[usize]) -> usize {
    let k = shifts.len();
    shifts
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &s)| acc | (((value >> (k - 1 - j)) & 1) << s))
}

/// A pure state of a labeled qubit register, possibly unnormalized.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    labels: Vec<Label>,
    amps: Array1<Complex64>,
}

impl Ket {
    /// Build a ket from explicit amplitudes in basis order.
    pub fn from_amplitudes(
        labels: Vec<Label>,
        amps: Vec<Complex64>,
    ) -> Result<Self, QstateError> {
        check_unique(&labels)?;
        let expected = 1usize << labels.len();
        if amps.len() != expected {
            return Err(QstateError::DimensionMismatch {
                got: amps.len(),
                expected,
            });
        }
        Ok(Ket {
            labels,
            amps: Array1::from_vec(amps),
        })
    }

    /// The computational basis state |bits⟩.
    pub fn basis(labels: Vec<Label>, bits: &str) -> Result<Self, QstateError> {
        check_unique(&labels)?;
        let n = labels.len();
        let idx = bits_to_index(bits, n)?;
        let mut amps = Array1::zeros(1 << n);
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(Ket { labels, amps })
    }

    /// Single-qubit ket a0|0⟩ + a1|1⟩.
    pub fn qubit(label: impl Into<Label>, a0: Complex64, a1: Complex64) -> Self {
        Ket {
            labels: vec![label.into()],
            amps: Array1::from_vec(vec![a0, a1]),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amps
    }

    /// Amplitude of the basis state |bits⟩.
    pub fn amp(&self, bits: &str) -> Result<Complex64, QstateError> {
        Ok(self.amps[bits_to_index(bits, self.labels.len())?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self, QstateError> {
        let n = self.norm();
        if n == 0.0 {
            return Err(QstateError::ZeroNorm);
        }
        Ok(Ket {
            labels: self.labels.clone(),
            amps: self.amps.mapv(|a| a / n),
        })
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Ket {
            labels: self.labels.clone(),
            amps: self.amps.mapv(|a| a * c),
        }
    }

    /// Tensor product; `self`'s labels come first (and stay most
    /// significant). Label sets must be disjoint.
    pub fn tensor(&self, other: &Ket) -> Result<Self, QstateError> {
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        check_unique(&labels)?;
        let db = other.dim();
        let mut amps = Array1::zeros(self.dim() * db);
        for (i, a) in self.amps.iter().enumerate() {
            for (j, b) in other.amps.iter().enumerate() {
                amps[i * db + j] = a * b;
            }
        }
        Ok(Ket { labels, amps })
    }

    fn positions_of(&self, wanted: &[Label]) -> Result<Vec<usize>, QstateError> {
        wanted
            .iter()
            .map(|l| {
                self.labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| QstateError::UnknownLabel(l.clone()))
            })
            .collect()
    }

    /// The same state expressed over a permutation of its labels.
    pub fn reordered(&self, order: &[Label]) -> Result<Self, QstateError> {
        if order.len() != self.labels.len() {
            return Err(QstateError::LabelMismatch(format!(
                "expected {} labels, got {}",
                self.labels.len(),
                order.len()
            )));
        }
        check_unique(order)?;
        let perm = self.positions_of(order)?;
        let n = self.labels.len();
        let mut amps = Array1::zeros(self.dim());
        for new_idx in 0..self.dim() {
            let mut old_idx = 0usize;
            for (p, &old_pos) in perm.iter().enumerate() {
                let bit = (new_idx >> (n - 1 - p)) & 1;
                old_idx |= bit << (n - 1 - old_pos);
            }
            amps[new_idx] = self.amps[old_idx];
        }
        Ok(Ket {
            labels: order.to_vec(),
            amps,
        })
    }

    /// ⟨self|other⟩, conjugating `self`. The label sets must agree; `other`
    /// is reordered automatically if its label order differs.
    pub fn inner(&self, other: &Ket) -> Result<Complex64, QstateError> {
        let dot = |rhs: &Ket| -> Complex64 {
            self.amps
                .iter()
                .zip(rhs.amps.iter())
                .map(|(a, b)| a.conj() * b)
                .sum()
        };
        if self.labels == other.labels {
            return Ok(dot(other));
        }
        let reordered = other.reordered(&self.labels).map_err(|_| {
            QstateError::LabelMismatch(format!(
                "[{}] vs [{}]",
                join_labels(&self.labels),
                join_labels(&other.labels)
            ))
        })?;
        Ok(dot(&reordered))
    }

    /// Project a sub-register onto the ket `sub` (conjugated), returning the
    /// subnormalized remainder ket on the remaining labels together with the
    /// success probability. The remainder is never renormalized here.
    pub fn condition_on(&self, sub: &Ket) -> Result<(Ket, f64), QstateError> {
        let n = self.labels.len();
        let spos = self.positions_of(sub.labels())?;
        let sshift: Vec<usize> = spos.iter().map(|&p| n - 1 - p).collect();
        let remaining: Vec<Label> = self
            .labels
            .iter()
            .filter(|l| !sub.labels().contains(l))
            .cloned()
            .collect();
        let rpos = self.positions_of(&remaining)?;
        let rshift: Vec<usize> = rpos.iter().map(|&p| n - 1 - p).collect();
        let rdim = 1usize << remaining.len();
        let sdim = sub.dim();
        let mut amps = Array1::zeros(rdim);
        for j in 0..rdim {
            let base = spread(j, &rshift);
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..sdim {
                acc += sub.amplitudes()[i].conj() * self.amps[base | spread(i, &sshift)];
            }
            amps[j] = acc;
        }
        let ket = Ket {
            labels: remaining,
            amps,
        };
        let p = ket.norm_sqr();
        Ok((ket, p))
    }
}

fn join_labels(labels: &[Label]) -> String {
    labels
        .iter()
        .map(Label::as_str)
        .collect::<Vec<_>>()
        .join(",")
}

/// A linear operator on a subset of qubit labels, stored densely.
#[derive(Clone, Debug)]
pub struct Operator {
    labels: Vec<Label>,
    matrix: Array2<Complex64>,
}

impl Operator {
    pub fn from_matrix(
        labels: Vec<Label>,
        matrix: Array2<Complex64>,
    ) -> Result<Self, QstateError> {
        check_unique(&labels)?;
        let d = 1usize << labels.len();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(QstateError::BadMatrixShape {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected: d,
            });
        }
        Ok(Operator { labels, matrix })
    }

    pub fn identity(labels: Vec<Label>) -> Result<Self, QstateError> {
        check_unique(&labels)?;
        let d = 1usize << labels.len();
        Ok(Operator {
            labels,
            matrix: Array2::eye(d),
        })
    }

    /// CNOT with basis order (control, target): flips the target bit when
    /// the control bit is 1.
    pub fn cnot(
        control: impl Into<Label>,
        target: impl Into<Label>,
    ) -> Result<Self, QstateError> {
        let (c, t) = (control.into(), target.into());
        if c == t {
            return Err(QstateError::EqualLabels(c));
        }
        let mut m = Array2::zeros((4, 4));
        let one = Complex64::new(1.0, 0.0);
        m[(0b00, 0b00)] = one;
        m[(0b01, 0b01)] = one;
        m[(0b11, 0b10)] = one;
        m[(0b10, 0b11)] = one;
        Ok(Operator {
            labels: vec![c, t],
            matrix: m,
        })
    }

    /// Rank-1 projector |bits⟩⟨bits| on the given labels.
    pub fn projector(bits: &str, labels: Vec<Label>) -> Result<Self, QstateError> {
        check_unique(&labels)?;
        let idx = bits_to_index(bits, labels.len())?;
        let d = 1usize << labels.len();
        let mut m = Array2::zeros((d, d));
        m[(idx, idx)] = Complex64::new(1.0, 0.0);
        Ok(Operator { labels, matrix: m })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The same operator expressed over a permutation of its labels.
    pub fn reordered(&self, order: &[Label]) -> Result<Self, QstateError> {
        if order.len() != self.labels.len() {
            return Err(QstateError::LabelMismatch(format!(
                "expected {} labels, got {}",
                self.labels.len(),
                order.len()
            )));
        }
        check_unique(order)?;
        let perm: Vec<usize> = order
            .iter()
            .map(|l| {
                self.labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| QstateError::UnknownLabel(l.clone()))
            })
            .collect::<Result<_, _>>()?;
        let n = self.labels.len();
        let d = self.dim();
        let old_index = |new_idx: usize| -> usize {
            let mut old = 0usize;
            for (p, &old_pos) in perm.iter().enumerate() {
                let bit = (new_idx >> (n - 1 - p)) & 1;
                old |= bit << (n - 1 - old_pos);
            }
            old
        };
        let mut m = Array2::zeros((d, d));
        for i in 0..d {
            let oi = old_index(i);
            for j in 0..d {
                m[(i, j)] = self.matrix[(oi, old_index(j))];
            }
        }
        Ok(Operator {
            labels: order.to_vec(),
            matrix: m,
        })
    }

    /// Sum of two operators over the same label set (order may differ).
    pub fn add(&self, other: &Operator) -> Result<Self, QstateError> {
        let other = if self.labels == other.labels {
            other.clone()
        } else {
            other.reordered(&self.labels)?
        };
        Ok(Operator {
            labels: self.labels.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    /// Matrix product `self · other` over the same label set.
    pub fn compose(&self, other: &Operator) -> Result<Self, QstateError> {
        let other = if self.labels == other.labels {
            other.clone()
        } else {
            other.reordered(&self.labels)?
        };
        Ok(Operator {
            labels: self.labels.clone(),
            matrix: self.matrix.dot(&other.matrix),
        })
    }

    pub fn dagger(&self) -> Self {
        Operator {
            labels: self.labels.clone(),
            matrix: self.matrix.t().mapv(|a| a.conj()),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// max |P² − P| together with max |P − P†|.
    pub fn projector_deviation(&self) -> f64 {
        let p2 = self.matrix.dot(&self.matrix);
        let dagger = self.matrix.t().mapv(|a| a.conj());
        let mut dev: f64 = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                dev = dev.max((p2[(i, j)] - self.matrix[(i, j)]).norm());
                dev = dev.max((dagger[(i, j)] - self.matrix[(i, j)]).norm());
            }
        }
        dev
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        self.projector_deviation() <= tol
    }

    /// max |U†U − 1|.
    pub fn unitarity_deviation(&self) -> f64 {
        let udu = self.dagger().matrix.dot(&self.matrix);
        let mut dev: f64 = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let want = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((udu[(i, j)] - Complex64::new(want, 0.0)).norm());
            }
        }
        dev
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// max |A − B| entrywise over a shared label order.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64, QstateError> {
        let other = if self.labels == other.labels {
            other.clone()
        } else {
            other.reordered(&self.labels)?
        };
        let mut dev: f64 = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                dev = dev.max((self.matrix[(i, j)] - other.matrix[(i, j)]).norm());
            }
        }
        Ok(dev)
    }

    /// Apply to a ket, acting as the identity on labels the operator does
    /// not mention. The result may be unnormalized.
    pub fn apply(&self, ket: &Ket) -> Result<Ket, QstateError> {
        let n = ket.n_qubits();
        let k = self.labels.len();
        let pos = ket.positions_of(&self.labels)?;
        let shifts: Vec<usize> = pos.iter().map(|&p| n - 1 - p).collect();
        let touched: usize = shifts.iter().map(|&s| 1usize << s).sum();
        let kd = 1usize << k;
        let mut amps = Array1::zeros(ket.dim());
        for base in 0..ket.dim() {
            if base & touched != 0 {
                continue;
            }
            for row in 0..kd {
                let mut acc = Complex64::new(0.0, 0.0);
                for col in 0..kd {
                    acc += self.matrix[(row, col)] * ket.amps[base | spread(col, &shifts)];
                }
                amps[base | spread(row, &shifts)] = acc;
            }
        }
        Ok(Ket {
            labels: ket.labels.clone(),
            amps,
        })
    }
}
