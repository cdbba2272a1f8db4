//! Tolerance rules for the comparator.
//!
//! One rule per line, `a:b.quantity = bound`, where `a` and `b` are engine
//! names or `*` and `quantity` is a compared quantity or `*`. `#` starts a
//! comment. The pair is unordered. The most specific matching rule wins;
//! among equally specific rules the later one wins.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ToleranceError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

/// Numerical engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    ClosedForm,
    Ode,
    Grid,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::ClosedForm, Engine::Ode, Engine::Grid];

    pub fn name(self) -> &'static str {
        match self {
            Engine::ClosedForm => "closed_form",
            Engine::Ode => "ode",
            Engine::Grid => "grid",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = String;

    /// Accepts `closed` as short for `closed_form`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "closed_form" | "closed" => Ok(Engine::ClosedForm),
            "ode" => Ok(Engine::Ode),
            "grid" => Ok(Engine::Grid),
            _ => Err(format!("unknown engine {s:?}")),
        }
    }
}

/// Quantities compared between engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantity {
    MeanX,
    Dispersion,
    Energy,
    Norm,
    Trajectories,
    DensityL2,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::MeanX,
        Quantity::Dispersion,
        Quantity::Energy,
        Quantity::Norm,
        Quantity::Trajectories,
        Quantity::DensityL2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::MeanX => "mean_x",
            Quantity::Dispersion => "dispersion",
            Quantity::Energy => "energy",
            Quantity::Norm => "norm",
            Quantity::Trajectories => "trajectories",
            Quantity::DensityL2 => "density_l2",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Quantity::ALL.into_iter().find(|q| q.name() == s).ok_or_else(|| format!("unknown quantity {s:?}"))
    }
}

/// One side of a rule; `None` is the wildcard.
type Slot<T> = Option<T>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rule {
    pub a: Slot<Engine>,
    pub b: Slot<Engine>,
    pub quantity: Slot<Quantity>,
    pub bound: f64,
}

impl Rule {
    fn matches(&self, x: Engine, y: Engine, q: Quantity) -> bool {
        let side = |s: Slot<Engine>, e: Engine| s.is_none_or(|v| v == e);
        self.quantity.is_none_or(|v| v == q) && ((side(self.a, x) && side(self.b, y)) || (side(self.a, y) && side(self.b, x)))
    }

    fn specificity(&self) -> usize {
        self.a.is_some() as usize + self.b.is_some() as usize + 2 * self.quantity.is_some() as usize
    }

    /// Parses the key part `a:b.quantity`.
    pub fn parse_key(key: &str, bound: f64) -> Result<Self, String> {
        let (pair, quantity) = key.trim().split_once('.').ok_or("expected `engine:engine.quantity`")?;
        let (a, b) = pair.split_once(':').ok_or("expected `engine:engine` before the quantity")?;
        let slot = |s: &str| -> Result<Slot<Engine>, String> {
            match s.trim() {
                "*" => Ok(None),
                e => e.parse().map(Some),
            }
        };
        let quantity = match quantity.trim() {
            "*" => None,
            q => Some(q.parse()?),
        };
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(format!("bound must be finite and non-negative, got {bound}"));
        }
        Ok(Rule { a: slot(a)?, b: slot(b)?, quantity, bound })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tolerances {
    rules: Vec<Rule>,
}

impl Tolerances {
    pub fn push(&mut self, rule: Rule) {
        self.rules.push(rule);
    }

    /// Rules of `other` take precedence over equally specific rules here.
    pub fn extend(&mut self, other: &Tolerances) {
        self.rules.extend_from_slice(&other.rules);
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Bound for `q` between `x` and `y`, if any rule applies.
    pub fn bound(&self, x: Engine, y: Engine, q: Quantity) -> Option<f64> {
        self.rules
            .iter()
            .enumerate()
            .filter(|(_, r)| r.matches(x, y, q))
            .max_by_key(|(i, r)| (r.specificity(), *i))
            .map(|(_, r)| r.bound)
    }

    pub fn parse(text: &str) -> Result<Self, ToleranceError> {
        let mut out = Tolerances::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ToleranceError::Syntax { line: n + 1, msg };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = bound`".into()))?;
            let bound: f64 = value.trim().parse().map_err(|_| err(format!("not a number: {:?}", value.trim())))?;
            out.push(Rule::parse_key(key, bound).map_err(err)?);
        }
        Ok(out)
    }
}

impl fmt::Display for Tolerances {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |s: Slot<Engine>| s.map_or("*", Engine::name);
        for r in &self.rules {
            writeln!(f, "{}:{}.{} = {:e}", name(r.a), name(r.b), r.quantity.map_or("*", Quantity::name), r.bound)?;
        }
        Ok(())
    }
}
