//! Optical mode networks: ordered beam-splitter and wave-plate elements
//! over declared spatial ports, plus the network file format.
//!
//! # File format (`pigeonnet`, version 1)
//!
//! Line-oriented text. `#` starts a comment; blank lines are ignored.
//!
//! ```text
//! pigeonnet 1
//! ports A B C 1 2 3 a3 b3 c1 c2
//! inputs A B C
//! outputs 1 2 3
//! hwp 22.5 A
//! bs 1/3 A 2
//! ...
//! ```
//!
//! * `pigeonnet 1` — versioned header, must come first.
//! * `ports` — every spatial port, in declaration order. Each port carries
//!   an H and a V polarization mode. Ports that are neither inputs nor
//!   outputs are loss/ancilla ports, initialized to vacuum and excluded by
//!   coincidence postselection.
//! * `inputs` / `outputs` — exactly three declared ports each, disjoint.
//! * `bs T a b` — polarization-preserving beam splitter between ports `a`
//!   and `b` with transmissivity `T` in (0, 1): a† → √T a† + i√(1−T) b†,
//!   b† → i√(1−T) a† + √T b† (i on reflection, symmetric).
//! * `hwp angle p` — half-wave plate on port `p` with optical axis at
//!   `angle` degrees: H → cos2φ·H + sin2φ·V, V → sin2φ·H − cos2φ·V.
//!
//! Numbers may be written as decimals (`0.5`) or fractions (`1/3`).
//! Elements are applied in file order.

use ndarray::Array2;
use num_complex::Complex64;

use super::PhotonicsError;
use crate::photonics::fock::FockState;

pub const FORMAT_NAME: &str = "pigeonnet";
pub const FORMAT_VERSION: u32 = 1;

/// Horizontal or vertical polarization; H maps to meter bit 0, V to 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub fn bit(&self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

/// One optical mode: a spatial port and a polarization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mode {
    pub port: String,
    pub polarization: Polarization,
}

/// A single linear element, referencing ports by index.
#[derive(Clone, Debug)]
pub enum Element {
    BeamSplitter {
        transmissivity: f64,
        port_a: usize,
        port_b: usize,
    },
    WavePlate {
        angle_deg: f64,
        port: usize,
    },
}

/// An ordered element list over a declared set of ports.
#[derive(Clone, Debug)]
pub struct ModeNetwork {
    ports: Vec<String>,
    inputs: [usize; 3],
    outputs: [usize; 3],
    elements: Vec<Element>,
}

impl ModeNetwork {
    pub fn new(
        ports: Vec<String>,
        inputs: [String; 3],
        outputs: [String; 3],
    ) -> Result<Self, PhotonicsError> {
        for (i, p) in ports.iter().enumerate() {
            if ports[i + 1..].contains(p) {
                return Err(PhotonicsError::Schema(format!("duplicate port `{p}`")));
            }
        }
        let resolve = |name: &String| -> Result<usize, PhotonicsError> {
            ports
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| PhotonicsError::UnknownPort(name.clone()))
        };
        let inputs = [
            resolve(&inputs[0])?,
            resolve(&inputs[1])?,
            resolve(&inputs[2])?,
        ];
        let outputs = [
            resolve(&outputs[0])?,
            resolve(&outputs[1])?,
            resolve(&outputs[2])?,
        ];
        for i in inputs {
            if outputs.contains(&i) {
                return Err(PhotonicsError::Schema(format!(
                    "port `{}` declared as both input and output",
                    ports[i]
                )));
            }
        }
        Ok(ModeNetwork {
            ports,
            inputs,
            outputs,
            elements: Vec::new(),
        })
    }

    pub fn push_beamsplitter(
        &mut self,
        transmissivity: f64,
        port_a: &str,
        port_b: &str,
    ) -> Result<(), PhotonicsError> {
        if !(transmissivity > 0.0 && transmissivity < 1.0) {
            return Err(PhotonicsError::TransmissivityOutOfRange(transmissivity));
        }
        let a = self.port_index(port_a)?;
        let b = self.port_index(port_b)?;
        if a == b {
            return Err(PhotonicsError::Schema(format!(
                "beam splitter needs two distinct ports, got `{port_a}` twice"
            )));
        }
        self.elements.push(Element::BeamSplitter {
            transmissivity,
            port_a: a,
            port_b: b,
        });
        Ok(())
    }

    pub fn push_waveplate(&mut self, angle_deg: f64, port: &str) -> Result<(), PhotonicsError> {
        let p = self.port_index(port)?;
        self.elements.push(Element::WavePlate {
            angle_deg,
            port: p,
        });
        Ok(())
    }

    pub fn ports(&self) -> &[String] {
        &self.ports
    }

    pub fn n_ports(&self) -> usize {
        self.ports.len()
    }

    pub fn n_modes(&self) -> usize {
        2 * self.ports.len()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn input_ports(&self) -> [&str; 3] {
        self.inputs.map(|i| self.ports[i].as_str())
    }

    pub fn output_ports(&self) -> [&str; 3] {
        self.outputs.map(|i| self.ports[i].as_str())
    }

    pub fn port_index(&self, name: &str) -> Result<usize, PhotonicsError> {
        self.ports
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| PhotonicsError::UnknownPort(name.to_owned()))
    }

    /// Mode slot of (port, polarization) in occupation vectors: H then V
    /// per port, ports in declaration order.
    pub fn mode_index(&self, port: usize, pol: Polarization) -> usize {
        2 * port + pol.bit()
    }

    fn two_mode_blocks(&self, element: &Element) -> Vec<(usize, usize, [[Complex64; 2]; 2])> {
        match *element {
            Element::BeamSplitter {
                transmissivity,
                port_a,
                port_b,
            } => {
                let t = Complex64::new(transmissivity.sqrt(), 0.0);
                let r = Complex64::new(0.0, (1.0 - transmissivity).sqrt());
                let u = [[t, r], [r, t]];
                vec![
                    (
                        self.mode_index(port_a, Polarization::H),
                        self.mode_index(port_b, Polarization::H),
                        u,
                    ),
                    (
                        self.mode_index(port_a, Polarization::V),
                        self.mode_index(port_b, Polarization::V),
                        u,
                    ),
                ]
            }
            Element::WavePlate { angle_deg, port } => {
                let two_phi = 2.0 * angle_deg.to_radians();
                let (s, c) = two_phi.sin_cos();
                let u = [
                    [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(-c, 0.0)],
                ];
                vec![(
                    self.mode_index(port, Polarization::H),
                    self.mode_index(port, Polarization::V),
                    u,
                )]
            }
        }
    }

    /// Evolve a Fock state through the whole element list, exactly.
    pub fn evolve(&self, state: &FockState) -> Result<FockState, PhotonicsError> {
        if state.n_modes() != self.n_modes() {
            return Err(PhotonicsError::BadOccupation(format!(
                "state has {} modes, network has {}",
                state.n_modes(),
                self.n_modes()
            )));
        }
        let mut current = state.clone();
        for element in &self.elements {
            for (m0, m1, u) in self.two_mode_blocks(element) {
                current = current.apply_two_mode(m0, m1, u);
            }
        }
        Ok(current)
    }

    /// The total single-photon transfer matrix over all modes, elements
    /// composed in order.
    pub fn single_photon_unitary(&self) -> Array2<Complex64> {
        let d = self.n_modes();
        let mut total: Array2<Complex64> = Array2::eye(d);
        for element in &self.elements {
            let mut step: Array2<Complex64> = Array2::eye(d);
            for (m0, m1, u) in self.two_mode_blocks(element) {
                step[(m0, m0)] = u[0][0];
                step[(m0, m1)] = u[0][1];
                step[(m1, m0)] = u[1][0];
                step[(m1, m1)] = u[1][1];
            }
            total = step.dot(&total);
        }
        total
    }

    /// max |U†U − 1| for the total transfer matrix.
    pub fn unitarity_deviation(&self) -> f64 {
        let u = self.single_photon_unitary();
        let udu = u.t().mapv(|a| a.conj()).dot(&u);
        let d = self.n_modes();
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let want = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((udu[(i, j)] - Complex64::new(want, 0.0)).norm());
            }
        }
        dev
    }

    /// Serialize back into the `pigeonnet 1` text form.
    pub fn to_text(&self) -> String {
        let mut out = format!("{FORMAT_NAME} {FORMAT_VERSION}\n");
        out.push_str(&format!("ports {}\n", self.ports.join(" ")));
        out.push_str(&format!("inputs {}\n", self.input_ports().join(" ")));
        out.push_str(&format!("outputs {}\n", self.output_ports().join(" ")));
        for e in &self.elements {
            match e {
                Element::BeamSplitter {
                    transmissivity,
                    port_a,
                    port_b,
                } => out.push_str(&format!(
                    "bs {} {} {}\n",
                    format_number(*transmissivity),
                    self.ports[*port_a],
                    self.ports[*port_b]
                )),
                Element::WavePlate { angle_deg, port } => out.push_str(&format!(
                    "hwp {} {}\n",
                    format_number(*angle_deg),
                    self.ports[*port]
                )),
            }
        }
        out
    }
}

fn format_number(x: f64) -> String {
    // keep well-known fractions exact in serialized form
    for (num, den) in [(1u32, 2u32), (1, 3), (2, 3), (1, 4), (3, 4)] {
        if (x - f64::from(num) / f64::from(den)).abs() < 1e-15 {
            return format!("{num}/{den}");
        }
    }
    format!("{x}")
}

/// Parse `0.5`, `1/3`, `pi/4`, ... Used by the network and sweep-config
/// dialects.
pub(crate) fn parse_number_token(token: &str) -> Option<f64> {
    let parse_part = |part: &str| -> Option<f64> {
        if part == "pi" {
            Some(std::f64::consts::PI)
        } else {
            part.parse::<f64>().ok()
        }
    };
    if let Some((num, den)) = token.split_once('/') {
        match (parse_part(num), parse_part(den)) {
            (Some(n), Some(d)) if d != 0.0 => Some(n / d),
            _ => None,
        }
    } else {
        parse_part(token)
    }
}

fn parse_number(token: &str, line_no: usize) -> Result<f64, PhotonicsError> {
    parse_number_token(token).ok_or_else(|| PhotonicsError::Parse {
        line: line_no,
        message: format!("cannot parse number `{token}`"),
    })
}

/// Parse the `pigeonnet 1` network format.
pub fn parse_network(text: &str) -> Result<ModeNetwork, PhotonicsError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line_no, header) = lines.next().ok_or(PhotonicsError::Parse {
        line: 1,
        message: "empty network file".into(),
    })?;
    let mut header_tokens = header.split_whitespace();
    if header_tokens.next() != Some(FORMAT_NAME) {
        return Err(PhotonicsError::Parse {
            line: line_no,
            message: format!("expected `{FORMAT_NAME} <version>` header"),
        });
    }
    match header_tokens.next().map(str::parse::<u32>) {
        Some(Ok(FORMAT_VERSION)) => {}
        Some(Ok(v)) => {
            return Err(PhotonicsError::Parse {
                line: line_no,
                message: format!("unsupported {FORMAT_NAME} version {v}"),
            })
        }
        _ => {
            return Err(PhotonicsError::Parse {
                line: line_no,
                message: "missing format version".into(),
            })
        }
    }

    let mut ports: Option<Vec<String>> = None;
    let mut inputs: Option<[String; 3]> = None;
    let mut outputs: Option<[String; 3]> = None;
    let mut network: Option<ModeNetwork> = None;

    for (line_no, line) in lines {
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().expect("line is nonempty");
        let rest: Vec<&str> = tokens.collect();
        let take3 = |rest: &[&str]| -> Result<[String; 3], PhotonicsError> {
            if rest.len() != 3 {
                return Err(PhotonicsError::Parse {
                    line: line_no,
                    message: format!("`{keyword}` needs exactly 3 ports"),
                });
            }
            Ok([rest[0].into(), rest[1].into(), rest[2].into()])
        };
        match keyword {
            "ports" => {
                if rest.is_empty() {
                    return Err(PhotonicsError::Parse {
                        line: line_no,
                        message: "`ports` needs at least one name".into(),
                    });
                }
                ports = Some(rest.iter().map(|s| s.to_string()).collect());
            }
            "inputs" => inputs = Some(take3(&rest)?),
            "outputs" => outputs = Some(take3(&rest)?),
            "bs" | "hwp" => {
                if network.is_none() {
                    let (p, i, o) = match (ports.take(), inputs.take(), outputs.take()) {
                        (Some(p), Some(i), Some(o)) => (p, i, o),
                        _ => {
                            return Err(PhotonicsError::Parse {
                                line: line_no,
                                message:
                                    "`ports`, `inputs` and `outputs` must precede elements".into(),
                            })
                        }
                    };
                    network = Some(ModeNetwork::new(p, i, o)?);
                }
                let net = network.as_mut().expect("just constructed");
                match keyword {
                    "bs" => {
                        if rest.len() != 3 {
                            return Err(PhotonicsError::Parse {
                                line: line_no,
                                message: "`bs` takes: transmissivity port_a port_b".into(),
                            });
                        }
                        let t = parse_number(rest[0], line_no)?;
                        net.push_beamsplitter(t, rest[1], rest[2])?;
                    }
                    "hwp" => {
                        if rest.len() != 2 {
                            return Err(PhotonicsError::Parse {
                                line: line_no,
                                message: "`hwp` takes: angle_degrees port".into(),
                            });
                        }
                        let angle = parse_number(rest[0], line_no)?;
                        net.push_waveplate(angle, rest[1])?;
                    }
                    _ => unreachable!(),
                }
            }
            other => {
                return Err(PhotonicsError::Parse {
                    line: line_no,
                    message: format!("unknown directive `{other}`"),
                })
            }
        }
    }

    match network {
        Some(net) => Ok(net),
        None => match (ports, inputs, outputs) {
            (Some(p), Some(i), Some(o)) => ModeNetwork::new(p, i, o),
            _ => Err(PhotonicsError::Parse {
                line: 0,
                message: "network file declares no ports/inputs/outputs".into(),
            }),
        },
    }
}

/// The meter-preparation network shipped with the crate: every input port
/// reaches every output port with squared amplitude 1/9, the remainder
/// going to loss ports, and the three coincidence assignments interfere
/// with one common phase. Its coincidence success probability is
/// 4(1 + 2cos²θ)/243.
pub fn default_network() -> ModeNetwork {
    parse_network(include_str!("../../data/default_network.net"))
        .expect("bundled default network parses")
}
