// SPDX-License-Identifier: Apache-2.0

//! Two-level PLA personalities.
//!
//! A personality is the programming of the two planes of a PLA: the AND
//! plane selects, for every product term, which input literals take part
//! (true, complemented or not connected), and the OR plane selects which
//! product terms are summed into each output.
//!
//! The text format is the Berkeley `.pla` format used by espresso, restricted
//! to the `f` (ON-set only) cover type:
//!
//! ```text
//! # f = A.B + C
//! .i 3
//! .o 1
//! .p 2
//! 11- 1
//! --1 1
//! .e
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest input count for which truth tables are enumerated.
pub const MAX_ENUM_INPUTS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlaError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("input vector has {found} bits, personality has {expected} inputs")]
    LengthMismatch { expected: usize, found: usize },
    #[error("output index {index} out of range ({num_outputs} outputs)")]
    OutputIndex { index: usize, num_outputs: usize },
    #[error("{num_inputs} inputs exceed the enumeration limit of {max}")]
    Capacity { num_inputs: usize, max: usize },
    #[error("invalid personality: {0}")]
    Shape(String),
}

/// Connection of one input to one product term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Literal {
    True,
    Complement,
    DontCare,
}

impl Literal {
    fn from_char(c: char) -> Option<Self> {
        match c {
            '1' => Some(Literal::True),
            '0' => Some(Literal::Complement),
            '-' => Some(Literal::DontCare),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Literal::True => '1',
            Literal::Complement => '0',
            Literal::DontCare => '-',
        }
    }

    /// Whether the literal is satisfied by the given input value.
    pub fn matches(self, bit: bool) -> bool {
        match self {
            Literal::True => bit,
            Literal::Complement => !bit,
            Literal::DontCare => true,
        }
    }
}

/// An assignment to every input of a PLA, most significant (first) input first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InputVector(Vec<bool>);

impl InputVector {
    pub fn new(bits: Vec<bool>) -> Self {
        InputVector(bits)
    }

    /// Vector number `index` in binary counting order, so that index 0 is
    /// `00..0` and index 1 sets only the last input.
    pub fn from_index(index: u64, num_inputs: usize) -> Self {
        InputVector(
            (0..num_inputs)
                .map(|i| (index >> (num_inputs - 1 - i)) & 1 == 1)
                .collect(),
        )
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0[i]
    }

    /// All `2^n` vectors in ascending binary order.
    pub fn all(num_inputs: usize) -> Result<impl Iterator<Item = InputVector>, PlaError> {
        check_capacity(num_inputs)?;
        Ok((0..1u64 << num_inputs).map(move |i| InputVector::from_index(i, num_inputs)))
    }
}

impl fmt::Display for InputVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for InputVector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err("empty input vector".into());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("invalid bit '{other}' in input vector \"{s}\"")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(InputVector)
    }
}

impl Serialize for InputVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for InputVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn check_capacity(num_inputs: usize) -> Result<(), PlaError> {
    if num_inputs > MAX_ENUM_INPUTS {
        Err(PlaError::Capacity {
            num_inputs,
            max: MAX_ENUM_INPUTS,
        })
    } else {
        Ok(())
    }
}

/// Default name of input `i`: `A`, `B`, ... then `x26`, `x27`, ...
pub fn default_input_label(i: usize) -> String {
    if i < 26 {
        char::from(b'A' + i as u8).to_string()
    } else {
        format!("x{i}")
    }
}

pub fn default_output_label(j: usize) -> String {
    format!("F{j}")
}

/// AND/OR plane programming of a PLA.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaPersonality {
    num_inputs: usize,
    num_outputs: usize,
    and_plane: Vec<Vec<Literal>>,
    or_plane: Vec<Vec<bool>>,
    input_labels: Vec<String>,
    output_labels: Vec<String>,
}

impl PlaPersonality {
    pub fn new(
        num_inputs: usize,
        num_outputs: usize,
        and_plane: Vec<Vec<Literal>>,
        or_plane: Vec<Vec<bool>>,
    ) -> Result<Self, PlaError> {
        let input_labels = (0..num_inputs).map(default_input_label).collect();
        let output_labels = (0..num_outputs).map(default_output_label).collect();
        Self::with_labels(
            num_inputs,
            num_outputs,
            and_plane,
            or_plane,
            input_labels,
            output_labels,
        )
    }

    pub fn with_labels(
        num_inputs: usize,
        num_outputs: usize,
        and_plane: Vec<Vec<Literal>>,
        or_plane: Vec<Vec<bool>>,
        input_labels: Vec<String>,
        output_labels: Vec<String>,
    ) -> Result<Self, PlaError> {
        if num_inputs == 0 {
            return Err(PlaError::Shape("at least one input is required".into()));
        }
        if num_outputs == 0 {
            return Err(PlaError::Shape("at least one output is required".into()));
        }
        if and_plane.len() != or_plane.len() {
            return Err(PlaError::Shape(format!(
                "AND plane has {} rows, OR plane has {}",
                and_plane.len(),
                or_plane.len()
            )));
        }
        if let Some((i, _)) = and_plane
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != num_inputs)
        {
            return Err(PlaError::Shape(format!(
                "AND plane row {i} does not have {num_inputs} entries"
            )));
        }
        if let Some((i, _)) = or_plane
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != num_outputs)
        {
            return Err(PlaError::Shape(format!(
                "OR plane row {i} does not have {num_outputs} entries"
            )));
        }
        if input_labels.len() != num_inputs || output_labels.len() != num_outputs {
            return Err(PlaError::Shape("label count does not match plane width".into()));
        }
        Ok(PlaPersonality {
            num_inputs,
            num_outputs,
            and_plane,
            or_plane,
            input_labels,
            output_labels,
        })
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    pub fn num_products(&self) -> usize {
        self.and_plane.len()
    }

    pub fn and_plane(&self) -> &[Vec<Literal>] {
        &self.and_plane
    }

    pub fn or_plane(&self) -> &[Vec<bool>] {
        &self.or_plane
    }

    pub fn input_labels(&self) -> &[String] {
        &self.input_labels
    }

    pub fn output_labels(&self) -> &[String] {
        &self.output_labels
    }

    fn check_vector(&self, v: &InputVector) -> Result<(), PlaError> {
        if v.len() != self.num_inputs {
            return Err(PlaError::LengthMismatch {
                expected: self.num_inputs,
                found: v.len(),
            });
        }
        Ok(())
    }

    fn product_true(&self, row: usize, v: &InputVector) -> bool {
        self.and_plane[row]
            .iter()
            .zip(v.bits())
            .all(|(lit, &b)| lit.matches(b))
    }

    /// Values of all outputs for one input vector.
    pub fn evaluate(&self, v: &InputVector) -> Result<Vec<bool>, PlaError> {
        self.check_vector(v)?;
        let mut out = vec![false; self.num_outputs];
        for (row, feeds) in self.or_plane.iter().enumerate() {
            if feeds.iter().any(|&f| f) && self.product_true(row, v) {
                for (o, &f) in out.iter_mut().zip(feeds) {
                    *o |= f;
                }
            }
        }
        Ok(out)
    }

    /// ON-set of one output, by enumeration of every input vector.
    pub fn expand_minterms(&self, output_index: usize) -> Result<BTreeSet<InputVector>, PlaError> {
        if output_index >= self.num_outputs {
            return Err(PlaError::OutputIndex {
                index: output_index,
                num_outputs: self.num_outputs,
            });
        }
        let mut set = BTreeSet::new();
        for v in InputVector::all(self.num_inputs)? {
            if self.evaluate(&v)?[output_index] {
                set.insert(v);
            }
        }
        Ok(set)
    }

    fn has_default_input_labels(&self) -> bool {
        self.input_labels
            .iter()
            .enumerate()
            .all(|(i, l)| *l == default_input_label(i))
    }

    fn has_default_output_labels(&self) -> bool {
        self.output_labels
            .iter()
            .enumerate()
            .all(|(j, l)| *l == default_output_label(j))
    }

    /// Renders the personality in `.pla` form.
    pub fn to_pla_string(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(".i {}\n.o {}\n", self.num_inputs, self.num_outputs));
        if !self.has_default_input_labels() {
            s.push_str(&format!(".ilb {}\n", self.input_labels.join(" ")));
        }
        if !self.has_default_output_labels() {
            s.push_str(&format!(".ob {}\n", self.output_labels.join(" ")));
        }
        s.push_str(&format!(".p {}\n", self.num_products()));
        for (lits, feeds) in self.and_plane.iter().zip(&self.or_plane) {
            s.extend(lits.iter().map(|l| l.to_char()));
            s.push(' ');
            s.extend(feeds.iter().map(|&f| if f { '1' } else { '0' }));
            s.push('\n');
        }
        s.push_str(".e\n");
        s
    }
}

impl FromStr for PlaPersonality {
    type Err = PlaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_pla(s)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> PlaError {
    PlaError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_count(line: usize, directive: &str, args: &[&str]) -> Result<usize, PlaError> {
    match args {
        [n] => n
            .parse::<usize>()
            .map_err(|_| parse_err(line, format!("{directive} expects a count, got \"{n}\""))),
        _ => Err(parse_err(line, format!("{directive} expects exactly one count"))),
    }
}

/// Parses a Berkeley `.pla` description.
///
/// Accepted directives are `.i`, `.o`, `.p`, `.ilb`, `.ob`, `.type f` and
/// `.e`/`.end`; anything after `.e` is ignored. Lines starting with `#` are
/// comments.
pub fn parse_pla(text: &str) -> Result<PlaPersonality, PlaError> {
    let mut num_inputs: Option<usize> = None;
    let mut num_outputs: Option<usize> = None;
    let mut declared_products: Option<(usize, usize)> = None;
    let mut input_labels: Option<Vec<String>> = None;
    let mut output_labels: Option<Vec<String>> = None;
    let mut and_plane = Vec::new();
    let mut or_plane = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if let Some(directive) = fields[0].strip_prefix('.') {
            let args = &fields[1..];
            match directive {
                "i" => {
                    if num_inputs.is_some() {
                        return Err(parse_err(lineno, "duplicate .i directive"));
                    }
                    let n = parse_count(lineno, ".i", args)?;
                    if n == 0 {
                        return Err(parse_err(lineno, ".i must be at least 1"));
                    }
                    num_inputs = Some(n);
                }
                "o" => {
                    if num_outputs.is_some() {
                        return Err(parse_err(lineno, "duplicate .o directive"));
                    }
                    let n = parse_count(lineno, ".o", args)?;
                    if n == 0 {
                        return Err(parse_err(lineno, ".o must be at least 1"));
                    }
                    num_outputs = Some(n);
                }
                "p" => {
                    if declared_products.is_some() {
                        return Err(parse_err(lineno, "duplicate .p directive"));
                    }
                    declared_products = Some((parse_count(lineno, ".p", args)?, lineno));
                }
                "ilb" => {
                    let n = num_inputs
                        .ok_or_else(|| parse_err(lineno, ".ilb before .i"))?;
                    if args.len() != n {
                        return Err(parse_err(
                            lineno,
                            format!(".ilb lists {} labels, .i declares {n}", args.len()),
                        ));
                    }
                    input_labels = Some(args.iter().map(|s| s.to_string()).collect());
                }
                "ob" => {
                    let n = num_outputs
                        .ok_or_else(|| parse_err(lineno, ".ob before .o"))?;
                    if args.len() != n {
                        return Err(parse_err(
                            lineno,
                            format!(".ob lists {} labels, .o declares {n}", args.len()),
                        ));
                    }
                    output_labels = Some(args.iter().map(|s| s.to_string()).collect());
                }
                "type" => match args {
                    ["f"] => {}
                    [other] => {
                        return Err(parse_err(
                            lineno,
                            format!("unsupported cover type \"{other}\", only \"f\" is accepted"),
                        ))
                    }
                    _ => return Err(parse_err(lineno, ".type expects exactly one argument")),
                },
                "e" | "end" => break,
                other => {
                    return Err(parse_err(lineno, format!("unsupported directive \".{other}\"")))
                }
            }
            continue;
        }

        let n = num_inputs.ok_or_else(|| parse_err(lineno, "cube row before .i directive"))?;
        let m = num_outputs.ok_or_else(|| parse_err(lineno, "cube row before .o directive"))?;
        let [cube, outs] = fields[..] else {
            return Err(parse_err(
                lineno,
                format!("expected an input cube and an output part, found {} fields", fields.len()),
            ));
        };
        let lits = cube
            .chars()
            .map(|c| {
                Literal::from_char(c).ok_or_else(|| {
                    parse_err(lineno, format!("invalid input character '{c}', expected 0, 1 or -"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if lits.len() != n {
            return Err(parse_err(
                lineno,
                format!("cube width {} does not match .i {n}", lits.len()),
            ));
        }
        let feeds = outs
            .chars()
            .map(|c| match c {
                '1' => Ok(true),
                '0' => Ok(false),
                other => Err(parse_err(
                    lineno,
                    format!("invalid output character '{other}', expected 0 or 1"),
                )),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if feeds.len() != m {
            return Err(parse_err(
                lineno,
                format!("output width {} does not match .o {m}", feeds.len()),
            ));
        }
        and_plane.push(lits);
        or_plane.push(feeds);
    }

    let n = num_inputs.ok_or_else(|| parse_err(last_line, "missing .i directive"))?;
    let m = num_outputs.ok_or_else(|| parse_err(last_line, "missing .o directive"))?;
    if let Some((p, line)) = declared_products {
        if p != and_plane.len() {
            return Err(parse_err(
                line,
                format!(".p declares {p} products but {} rows follow", and_plane.len()),
            ));
        }
    }
    PlaPersonality::with_labels(
        n,
        m,
        and_plane,
        or_plane,
        input_labels.unwrap_or_else(|| (0..n).map(default_input_label).collect()),
        output_labels.unwrap_or_else(|| (0..m).map(default_output_label).collect()),
    )
}
