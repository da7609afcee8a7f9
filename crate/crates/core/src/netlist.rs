// SPDX-License-Identifier: Apache-2.0

//! Gate-level PLA netlists with optional footer sleep domains.
//!
//! A personality with `n` inputs, `k` products and `m` outputs expands to
//! `n` input inverters (complement generators), `k` AND macros and `m` OR
//! macros. The power-gated variant puts every gate behind a footer sleep
//! transistor: one footer for the AND array (including the input inverters)
//! and one for the OR array, or a single footer shared by both.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::{DeviceError, FooterConfig};
use crate::pla::{InputVector, Literal, PlaError, PlaPersonality};

#[derive(Debug, Error)]
pub enum NetlistError {
    #[error("power-gated synthesis requires a footer template")]
    MissingFooter,
    #[error("{0} is only defined for power-gated netlists")]
    Unsupported(&'static str),
    #[error("invalid footer: {0}")]
    Footer(#[from] DeviceError),
    #[error("invalid netlist: {0}")]
    Invalid(String),
    #[error(transparent)]
    Pla(#[from] PlaError),
    #[error("netlist JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Conventional,
    PowerGated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SleepMode {
    Active,
    Sleep,
}

/// How gates are grouped behind footers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainLayout {
    /// One footer for the AND array, one for the OR array.
    #[default]
    PerArray,
    /// One footer for the whole PLA.
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    InputInverter,
    AndMacro,
    OrMacro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetKind {
    Input,
    Complement,
    Product,
    Output,
    VirtualGround,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Net {
    pub name: String,
    pub kind: NetKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateInstance {
    pub name: String,
    pub kind: GateKind,
    pub inputs: Vec<String>,
    pub output: String,
    /// Name of the sleep domain this gate sits in, if gated.
    pub sleep_domain: Option<String>,
}

impl GateInstance {
    pub fn fan_in(&self) -> usize {
        self.inputs.len()
    }

    /// Width this gate adds to its domain's `w_circuit`. A gate with no
    /// inputs (a tied-off macro) still counts as one stack.
    pub fn unit_width(&self, unit_width: f64) -> f64 {
        self.fan_in().max(1) as f64 * unit_width
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SleepDomain {
    pub name: String,
    pub footer: FooterConfig,
    pub members: Vec<String>,
    pub virtual_ground: String,
    pub mode: SleepMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthOptions {
    pub layout: DomainLayout,
    /// Width contributed per input of each gate.
    pub unit_width: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            layout: DomainLayout::PerArray,
            unit_width: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatedNetlist {
    pub variant: Variant,
    pub unit_width: f64,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub nets: Vec<Net>,
    /// Gates in evaluation order: inverters, AND macros, OR macros.
    pub gates: Vec<GateInstance>,
    pub sleep_domains: Vec<SleepDomain>,
}

pub const AND_DOMAIN: &str = "and_array";
pub const OR_DOMAIN: &str = "or_array";
pub const SHARED_DOMAIN: &str = "pla";

fn complement_net(input: &str) -> String {
    format!("{input}_n")
}

fn vgnd_net(domain: &str) -> String {
    format!("vgnd_{domain}")
}

/// Expands a personality into gates, with the default per-array layout and
/// unit width 1.
pub fn synthesize(
    p: &PlaPersonality,
    variant: Variant,
    footer_template: Option<&FooterConfig>,
) -> Result<GatedNetlist, NetlistError> {
    synthesize_with(p, variant, footer_template, &SynthOptions::default())
}

pub fn synthesize_with(
    p: &PlaPersonality,
    variant: Variant,
    footer_template: Option<&FooterConfig>,
    opts: &SynthOptions,
) -> Result<GatedNetlist, NetlistError> {
    if !(opts.unit_width > 0.0 && opts.unit_width.is_finite()) {
        return Err(NetlistError::Invalid("unit_width must be positive".into()));
    }
    let template = match variant {
        Variant::PowerGated => Some(footer_template.ok_or(NetlistError::MissingFooter)?),
        Variant::Conventional => None,
    };

    let mut nets = Vec::new();
    let mut gates = Vec::new();
    for name in p.input_labels() {
        nets.push(Net {
            name: name.clone(),
            kind: NetKind::Input,
        });
    }
    for name in p.input_labels() {
        nets.push(Net {
            name: complement_net(name),
            kind: NetKind::Complement,
        });
        gates.push(GateInstance {
            name: format!("inv_{name}"),
            kind: GateKind::InputInverter,
            inputs: vec![name.clone()],
            output: complement_net(name),
            sleep_domain: None,
        });
    }
    for (row, lits) in p.and_plane().iter().enumerate() {
        let product = format!("p{row}");
        nets.push(Net {
            name: product.clone(),
            kind: NetKind::Product,
        });
        let inputs = lits
            .iter()
            .zip(p.input_labels())
            .filter_map(|(lit, name)| match lit {
                Literal::True => Some(name.clone()),
                Literal::Complement => Some(complement_net(name)),
                Literal::DontCare => None,
            })
            .collect();
        gates.push(GateInstance {
            name: format!("and_{product}"),
            kind: GateKind::AndMacro,
            inputs,
            output: product,
            sleep_domain: None,
        });
    }
    for (col, name) in p.output_labels().iter().enumerate() {
        nets.push(Net {
            name: name.clone(),
            kind: NetKind::Output,
        });
        let inputs = p
            .or_plane()
            .iter()
            .enumerate()
            .filter(|(_, feeds)| feeds[col])
            .map(|(row, _)| format!("p{row}"))
            .collect();
        gates.push(GateInstance {
            name: format!("or_{name}"),
            kind: GateKind::OrMacro,
            inputs,
            output: name.clone(),
            sleep_domain: None,
        });
    }

    let mut sleep_domains = Vec::new();
    if let Some(template) = template {
        let groups: Vec<(&str, Vec<GateKind>)> = match opts.layout {
            DomainLayout::PerArray => vec![
                (AND_DOMAIN, vec![GateKind::InputInverter, GateKind::AndMacro]),
                (OR_DOMAIN, vec![GateKind::OrMacro]),
            ],
            DomainLayout::Shared => vec![(
                SHARED_DOMAIN,
                vec![GateKind::InputInverter, GateKind::AndMacro, GateKind::OrMacro],
            )],
        };
        for (domain, kinds) in groups {
            let mut members = Vec::new();
            let mut w_circuit = 0.0;
            for g in gates.iter_mut().filter(|g| kinds.contains(&g.kind)) {
                g.sleep_domain = Some(domain.to_string());
                members.push(g.name.clone());
                w_circuit += g.unit_width(opts.unit_width);
            }
            let footer = FooterConfig {
                w_circuit,
                ..*template
            };
            footer.validate()?;
            nets.push(Net {
                name: vgnd_net(domain),
                kind: NetKind::VirtualGround,
            });
            sleep_domains.push(SleepDomain {
                name: domain.to_string(),
                footer,
                members,
                virtual_ground: vgnd_net(domain),
                mode: SleepMode::Active,
            });
        }
    }

    let netlist = GatedNetlist {
        variant,
        unit_width: opts.unit_width,
        inputs: p.input_labels().to_vec(),
        outputs: p.output_labels().to_vec(),
        nets,
        gates,
        sleep_domains,
    };
    netlist.validate()?;
    Ok(netlist)
}

impl GatedNetlist {
    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    pub fn gate(&self, name: &str) -> Option<&GateInstance> {
        self.gates.iter().find(|g| g.name == name)
    }

    pub fn domain(&self, name: &str) -> Option<&SleepDomain> {
        self.sleep_domains.iter().find(|d| d.name == name)
    }

    /// Sleep domain of the gate driving `net`, if any.
    pub fn domain_of_net(&self, net: &str) -> Option<&SleepDomain> {
        let gate = self.gates.iter().find(|g| g.output == net)?;
        self.domain(gate.sleep_domain.as_deref()?)
    }

    /// Sleep domain holding the complement generator of input `line`.
    pub fn domain_of_input(&self, line: &str) -> Option<&SleepDomain> {
        self.domain_of_net(&complement_net(line))
    }

    /// Checks the structural invariants.
    pub fn validate(&self) -> Result<(), NetlistError> {
        let bad = |m: String| Err(NetlistError::Invalid(m));
        let mut declared = HashSet::new();
        for n in &self.nets {
            if !declared.insert(n.name.as_str()) {
                return bad(format!("net {} declared twice", n.name));
            }
        }
        for name in self.inputs.iter().chain(&self.outputs) {
            if !declared.contains(name.as_str()) {
                return bad(format!("port {name} is not a declared net"));
            }
        }
        let mut gate_names = HashSet::new();
        for g in &self.gates {
            if !gate_names.insert(g.name.as_str()) {
                return bad(format!("gate {} declared twice", g.name));
            }
            if let Some(pin) = g
                .inputs
                .iter()
                .chain(std::iter::once(&g.output))
                .find(|pin| !declared.contains(pin.as_str()))
            {
                return bad(format!("gate {} references undeclared net {pin}", g.name));
            }
            if g.kind == GateKind::InputInverter && g.fan_in() != 1 {
                return bad(format!("inverter {} must have one input", g.name));
            }
        }
        match (self.variant, self.sleep_domains.len()) {
            (Variant::Conventional, 0) => {}
            (Variant::Conventional, _) => return bad("conventional netlist has sleep domains".into()),
            (Variant::PowerGated, 0) => return bad("power-gated netlist has no sleep domain".into()),
            _ => {}
        }
        let products = self
            .nets
            .iter()
            .filter(|n| n.kind == NetKind::Product)
            .count();
        if products != self.count(GateKind::AndMacro) {
            return bad(format!(
                "{products} product nets for {} AND macros",
                self.count(GateKind::AndMacro)
            ));
        }
        for d in &self.sleep_domains {
            d.footer.validate()?;
            if !declared.contains(d.virtual_ground.as_str()) {
                return bad(format!("domain {} has undeclared virtual ground", d.name));
            }
            for m in &d.members {
                match self.gate(m) {
                    Some(g) if g.sleep_domain.as_deref() == Some(d.name.as_str()) => {}
                    _ => return bad(format!("domain {} member {m} does not point back", d.name)),
                }
            }
        }
        for g in &self.gates {
            if let Some(d) = &g.sleep_domain {
                match self.domain(d) {
                    Some(dom) if dom.members.contains(&g.name) => {}
                    _ => return bad(format!("gate {} names unknown domain {d}", g.name)),
                }
            }
        }
        Ok(())
    }

    /// Returns a copy with every sleep domain switched to `mode`.
    pub fn set_mode(&self, mode: SleepMode) -> Result<GatedNetlist, NetlistError> {
        if self.variant != Variant::PowerGated {
            return Err(NetlistError::Unsupported("set_mode"));
        }
        let mut next = self.clone();
        for d in &mut next.sleep_domains {
            d.mode = mode;
        }
        Ok(next)
    }

    /// Gate-level logic simulation: inverters negate, AND macros conjoin,
    /// OR macros disjoin. Gated domains are assumed active.
    pub fn simulate_logic(&self, v: &InputVector) -> Result<Vec<bool>, NetlistError> {
        if v.len() != self.inputs.len() {
            return Err(PlaError::LengthMismatch {
                expected: self.inputs.len(),
                found: v.len(),
            }
            .into());
        }
        let mut values: HashMap<&str, bool> = self
            .inputs
            .iter()
            .map(String::as_str)
            .zip(v.bits().iter().copied())
            .collect();
        for g in &self.gates {
            let mut pins = g.inputs.iter().map(|n| {
                values.get(n.as_str()).copied().ok_or_else(|| {
                    NetlistError::Invalid(format!("net {n} read before it is driven"))
                })
            });
            let out = match g.kind {
                GateKind::InputInverter => !pins.next().transpose()?.unwrap_or(false),
                GateKind::AndMacro => pins.try_fold(true, |acc, b| b.map(|b| acc && b))?,
                GateKind::OrMacro => pins.try_fold(false, |acc, b| b.map(|b| acc || b))?,
            };
            values.insert(g.output.as_str(), out);
        }
        self.outputs
            .iter()
            .map(|o| {
                values
                    .get(o.as_str())
                    .copied()
                    .ok_or_else(|| NetlistError::Invalid(format!("output {o} is undriven")))
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String, NetlistError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<GatedNetlist, NetlistError> {
        let n: GatedNetlist = serde_json::from_str(text)?;
        n.validate()?;
        Ok(n)
    }
}
