use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BitSet, FinitePoset, LatticeValue};
use crate::error::{Error, Result};

/// Default comparison slack for continuous carriers.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Finite carriers larger than this are not enumerated.
pub const ENUMERATION_LIMIT: usize = 1 << 20;

/// Carrier kind and parameters of a vertex lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatticeKind {
    /// `[0, inf]` with an explicit infinity.
    ExtendedNonneg,
    /// `[0, upper]`.
    Bounded {
        upper: f64,
    },
    Product {
        components: Vec<LatticeDescriptor>,
    },
    /// Powerset of a labelled universe.
    FiniteSet {
        universe: Vec<String>,
    },
    /// `[0, 1]^dim`.
    UnitVector {
        dim: usize,
    },
    /// Downsets of a finite poset, ordered by inclusion.
    Downset {
        poset: FinitePoset,
    },
}

/// Height of a lattice: length of its longest strict chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Height {
    Finite(usize),
    Unbounded,
}

impl Height {
    pub fn finite(self) -> Option<usize> {
        match self {
            Height::Finite(h) => Some(h),
            Height::Unbounded => None,
        }
    }
}

/// Runtime description of a vertex lattice.
///
/// All order operations go through the descriptor, which checks that values
/// have the matching shape. Continuous leaves compare with `tolerance` slack
/// on the `<=` side; finite leaves always compare exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DescriptorRepr", into = "DescriptorRepr")]
pub struct LatticeDescriptor {
    kind: LatticeKind,
    tolerance: f64,
}

#[derive(Serialize, Deserialize)]
struct DescriptorRepr {
    #[serde(flatten)]
    kind: LatticeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
}

impl TryFrom<DescriptorRepr> for LatticeDescriptor {
    type Error = Error;

    fn try_from(repr: DescriptorRepr) -> Result<Self> {
        let d = LatticeDescriptor::new(repr.kind)?;
        match repr.tolerance {
            Some(t) => d.with_tolerance(t),
            None => Ok(d),
        }
    }
}

impl From<LatticeDescriptor> for DescriptorRepr {
    fn from(d: LatticeDescriptor) -> Self {
        let default = default_tolerance(&d.kind);
        DescriptorRepr {
            tolerance: (d.tolerance != default).then_some(d.tolerance),
            kind: d.kind,
        }
    }
}

fn default_tolerance(kind: &LatticeKind) -> f64 {
    match kind {
        LatticeKind::ExtendedNonneg | LatticeKind::Bounded { .. } | LatticeKind::UnitVector { .. } => DEFAULT_TOLERANCE,
        LatticeKind::FiniteSet { .. } | LatticeKind::Downset { .. } => 0.0,
        LatticeKind::Product { components } => components.iter().map(|c| c.tolerance).fold(0.0, f64::max),
    }
}

fn mismatch(d: &LatticeDescriptor, v: &LatticeValue) -> Error {
    Error::DescriptorMismatch(format!(
        "{} value does not fit a {} lattice",
        v.kind_name(),
        d.kind_name()
    ))
}

fn scalar_leq(a: f64, b: f64, tol: f64) -> bool {
    b == f64::INFINITY || a <= b + tol
}

fn scalar_distance(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else if a.is_infinite() || b.is_infinite() {
        f64::INFINITY
    } else {
        (a - b).abs()
    }
}

impl LatticeDescriptor {
    pub fn new(kind: LatticeKind) -> Result<Self> {
        match &kind {
            LatticeKind::Bounded { upper } if !(upper.is_finite() && *upper >= 0.0) => {
                return Err(Error::InvalidDescriptor(format!(
                    "bounded scalar upper bound must be finite and nonnegative, got {upper}"
                )))
            }
            LatticeKind::Product { components } if components.is_empty() => {
                return Err(Error::InvalidDescriptor("product of zero lattices".into()))
            }
            LatticeKind::FiniteSet { universe } => {
                if universe.is_empty() {
                    return Err(Error::InvalidDescriptor("finite set universe is empty".into()));
                }
                for (i, label) in universe.iter().enumerate() {
                    if universe[..i].contains(label) {
                        return Err(Error::InvalidDescriptor(format!("duplicate universe label `{label}`")));
                    }
                }
            }
            LatticeKind::UnitVector { dim: 0 } => {
                return Err(Error::InvalidDescriptor("unit vector of dimension 0".into()))
            }
            _ => {}
        }
        let tolerance = default_tolerance(&kind);
        Ok(LatticeDescriptor { kind, tolerance })
    }

    pub fn extended_nonneg() -> Self {
        LatticeDescriptor {
            kind: LatticeKind::ExtendedNonneg,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn bounded(upper: f64) -> Result<Self> {
        Self::new(LatticeKind::Bounded { upper })
    }

    pub fn product(components: Vec<LatticeDescriptor>) -> Result<Self> {
        Self::new(LatticeKind::Product { components })
    }

    pub fn finite_set<S: Into<String>>(universe: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::new(LatticeKind::FiniteSet {
            universe: universe.into_iter().map(Into::into).collect(),
        })
    }

    /// Powerset of `{0, ..., n-1}` with the indices as labels.
    pub fn finite_set_n(n: usize) -> Result<Self> {
        Self::finite_set((0..n).map(|i| i.to_string()))
    }

    pub fn unit_vector(dim: usize) -> Result<Self> {
        Self::new(LatticeKind::UnitVector { dim })
    }

    pub fn downset(poset: FinitePoset) -> Self {
        LatticeDescriptor {
            kind: LatticeKind::Downset { poset },
            tolerance: 0.0,
        }
    }

    /// Sets the comparison slack of every continuous leaf.
    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance >= 0.0 && tolerance.is_finite()) {
            return Err(Error::InvalidDescriptor(format!(
                "tolerance {tolerance} is not a finite nonnegative number"
            )));
        }
        match &mut self.kind {
            LatticeKind::Product { components } => {
                for c in components.iter_mut() {
                    *c = c.clone().with_tolerance(tolerance)?;
                }
                self.tolerance = default_tolerance(&self.kind);
            }
            LatticeKind::FiniteSet { .. } | LatticeKind::Downset { .. } => {}
            _ => self.tolerance = tolerance,
        }
        Ok(self)
    }

    pub fn kind(&self) -> &LatticeKind {
        &self.kind
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            LatticeKind::ExtendedNonneg => "extended_nonneg",
            LatticeKind::Bounded { .. } => "bounded",
            LatticeKind::Product { .. } => "product",
            LatticeKind::FiniteSet { .. } => "finite_set",
            LatticeKind::UnitVector { .. } => "unit_vector",
            LatticeKind::Downset { .. } => "downset",
        }
    }

    pub fn components(&self) -> Option<&[LatticeDescriptor]> {
        match &self.kind {
            LatticeKind::Product { components } => Some(components),
            _ => None,
        }
    }

    /// Labels of a finite-set universe or the elements of a downset poset.
    pub fn labels(&self) -> Option<&[String]> {
        match &self.kind {
            LatticeKind::FiniteSet { universe } => Some(universe),
            LatticeKind::Downset { poset } => Some(poset.elements()),
            _ => None,
        }
    }

    pub fn poset(&self) -> Option<&FinitePoset> {
        match &self.kind {
            LatticeKind::Downset { poset } => Some(poset),
            _ => None,
        }
    }

    /// Checks that `v` is an element of this lattice.
    pub fn conforms(&self, v: &LatticeValue) -> Result<()> {
        let tol = self.tolerance;
        match (&self.kind, v) {
            (LatticeKind::ExtendedNonneg, LatticeValue::Scalar(x)) => {
                if x.is_nan() || *x < 0.0 {
                    return Err(Error::InvalidValue(format!("{x} is not in [0, inf]")));
                }
            }
            (LatticeKind::Bounded { upper }, LatticeValue::Scalar(x)) => {
                if x.is_nan() || *x < 0.0 || *x > upper + tol {
                    return Err(Error::InvalidValue(format!("{x} is not in [0, {upper}]")));
                }
            }
            (LatticeKind::Product { components }, LatticeValue::Tuple(items)) => {
                if components.len() != items.len() {
                    return Err(Error::DescriptorMismatch(format!(
                        "tuple of length {} for a product of {} lattices",
                        items.len(),
                        components.len()
                    )));
                }
                for (c, item) in components.iter().zip(items) {
                    c.conforms(item)?;
                }
            }
            (LatticeKind::FiniteSet { universe }, LatticeValue::Set(s)) => {
                if s.bound() > universe.len() {
                    return Err(Error::InvalidValue(format!(
                        "set {s:?} exceeds a universe of {} elements",
                        universe.len()
                    )));
                }
            }
            (LatticeKind::UnitVector { dim }, LatticeValue::Vector(xs)) => {
                if xs.len() != *dim {
                    return Err(Error::DescriptorMismatch(format!(
                        "vector of length {} for dimension {dim}",
                        xs.len()
                    )));
                }
                if let Some(x) = xs.iter().find(|x| x.is_nan() || **x < 0.0 || **x > 1.0 + tol) {
                    return Err(Error::InvalidValue(format!("component {x} is not in [0, 1]")));
                }
            }
            (LatticeKind::Downset { poset }, LatticeValue::Downset(s)) => {
                if !poset.is_downset(s) {
                    return Err(Error::InvalidValue(format!("{s:?} is not a downset")));
                }
            }
            _ => return Err(mismatch(self, v)),
        }
        Ok(())
    }

    pub fn leq(&self, a: &LatticeValue, b: &LatticeValue) -> Result<bool> {
        let tol = self.tolerance;
        Ok(match (&self.kind, a, b) {
            (
                LatticeKind::ExtendedNonneg | LatticeKind::Bounded { .. },
                LatticeValue::Scalar(x),
                LatticeValue::Scalar(y),
            ) => scalar_leq(*x, *y, tol),
            (LatticeKind::Product { components }, LatticeValue::Tuple(xs), LatticeValue::Tuple(ys)) => {
                self.check_arity(components, xs, ys)?;
                for ((c, x), y) in components.iter().zip(xs).zip(ys) {
                    if !c.leq(x, y)? {
                        return Ok(false);
                    }
                }
                true
            }
            (LatticeKind::FiniteSet { .. }, LatticeValue::Set(x), LatticeValue::Set(y))
            | (LatticeKind::Downset { .. }, LatticeValue::Downset(x), LatticeValue::Downset(y)) => x.is_subset(y),
            (LatticeKind::UnitVector { dim }, LatticeValue::Vector(xs), LatticeValue::Vector(ys)) => {
                self.check_dim(*dim, xs, ys)?;
                xs.iter().zip(ys).all(|(x, y)| *x <= y + tol)
            }
            _ => return Err(self.pair_mismatch(a, b)),
        })
    }

    pub fn join(&self, a: &LatticeValue, b: &LatticeValue) -> Result<LatticeValue> {
        self.combine(a, b, true)
    }

    pub fn meet(&self, a: &LatticeValue, b: &LatticeValue) -> Result<LatticeValue> {
        self.combine(a, b, false)
    }

    fn combine(&self, a: &LatticeValue, b: &LatticeValue, join: bool) -> Result<LatticeValue> {
        let pick = |x: f64, y: f64| if join { x.max(y) } else { x.min(y) };
        Ok(match (&self.kind, a, b) {
            (
                LatticeKind::ExtendedNonneg | LatticeKind::Bounded { .. },
                LatticeValue::Scalar(x),
                LatticeValue::Scalar(y),
            ) => LatticeValue::Scalar(pick(*x, *y)),
            (LatticeKind::Product { components }, LatticeValue::Tuple(xs), LatticeValue::Tuple(ys)) => {
                self.check_arity(components, xs, ys)?;
                LatticeValue::Tuple(
                    components
                        .iter()
                        .zip(xs)
                        .zip(ys)
                        .map(|((c, x), y)| c.combine(x, y, join))
                        .collect::<Result<_>>()?,
                )
            }
            (LatticeKind::FiniteSet { .. }, LatticeValue::Set(x), LatticeValue::Set(y)) => {
                LatticeValue::Set(if join { x.union(y) } else { x.intersection(y) })
            }
            (LatticeKind::Downset { .. }, LatticeValue::Downset(x), LatticeValue::Downset(y)) => {
                LatticeValue::Downset(if join { x.union(y) } else { x.intersection(y) })
            }
            (LatticeKind::UnitVector { dim }, LatticeValue::Vector(xs), LatticeValue::Vector(ys)) => {
                self.check_dim(*dim, xs, ys)?;
                LatticeValue::Vector(xs.iter().zip(ys).map(|(x, y)| pick(*x, *y)).collect())
            }
            _ => return Err(self.pair_mismatch(a, b)),
        })
    }

    fn check_arity(&self, components: &[LatticeDescriptor], xs: &[LatticeValue], ys: &[LatticeValue]) -> Result<()> {
        if xs.len() != components.len() || ys.len() != components.len() {
            return Err(Error::DescriptorMismatch(format!(
                "tuples of length {} and {} for a product of {} lattices",
                xs.len(),
                ys.len(),
                components.len()
            )));
        }
        Ok(())
    }

    fn check_dim(&self, dim: usize, xs: &[f64], ys: &[f64]) -> Result<()> {
        if xs.len() != dim || ys.len() != dim {
            return Err(Error::DescriptorMismatch(format!(
                "vectors of length {} and {} for dimension {dim}",
                xs.len(),
                ys.len()
            )));
        }
        Ok(())
    }

    fn pair_mismatch(&self, a: &LatticeValue, b: &LatticeValue) -> Error {
        Error::DescriptorMismatch(format!(
            "{} and {} values do not fit a {} lattice",
            a.kind_name(),
            b.kind_name(),
            self.kind_name()
        ))
    }

    pub fn bottom(&self) -> LatticeValue {
        match &self.kind {
            LatticeKind::ExtendedNonneg | LatticeKind::Bounded { .. } => LatticeValue::Scalar(0.0),
            LatticeKind::Product { components } => {
                LatticeValue::Tuple(components.iter().map(LatticeDescriptor::bottom).collect())
            }
            LatticeKind::FiniteSet { .. } => LatticeValue::Set(BitSet::new()),
            LatticeKind::UnitVector { dim } => LatticeValue::Vector(vec![0.0; *dim]),
            LatticeKind::Downset { .. } => LatticeValue::Downset(BitSet::new()),
        }
    }

    pub fn top(&self) -> LatticeValue {
        match &self.kind {
            LatticeKind::ExtendedNonneg => LatticeValue::Scalar(f64::INFINITY),
            LatticeKind::Bounded { upper } => LatticeValue::Scalar(*upper),
            LatticeKind::Product { components } => {
                LatticeValue::Tuple(components.iter().map(LatticeDescriptor::top).collect())
            }
            LatticeKind::FiniteSet { universe } => LatticeValue::Set(BitSet::full(universe.len())),
            LatticeKind::UnitVector { dim } => LatticeValue::Vector(vec![1.0; *dim]),
            LatticeKind::Downset { poset } => LatticeValue::Downset(BitSet::full(poset.len())),
        }
    }

    pub fn height(&self) -> Height {
        match &self.kind {
            LatticeKind::FiniteSet { universe } => Height::Finite(universe.len()),
            LatticeKind::Downset { poset } => Height::Finite(poset.len()),
            LatticeKind::Product { components } => components
                .iter()
                .map(LatticeDescriptor::height)
                .try_fold(0, |acc, h| h.finite().map(|h| acc + h))
                .map_or(Height::Unbounded, Height::Finite),
            _ => Height::Unbounded,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.height(), Height::Finite(_))
    }

    /// Number of elements of a finite lattice, or `None` for continuous ones
    /// and for finite ones above [`ENUMERATION_LIMIT`].
    pub fn cardinality(&self) -> Option<usize> {
        match &self.kind {
            LatticeKind::FiniteSet { universe } => (universe.len() < 21).then(|| 1usize << universe.len()),
            LatticeKind::Downset { poset } => (poset.len() <= 20).then(|| poset.downsets().len()),
            LatticeKind::Product { components } => components.iter().try_fold(1usize, |acc, c| {
                acc.checked_mul(c.cardinality()?).filter(|n| *n <= ENUMERATION_LIMIT)
            }),
            _ => None,
        }
    }

    /// All elements of a finite lattice. Products enumerate with the first
    /// component varying slowest.
    pub fn enumerate(&self) -> Result<Vec<LatticeValue>> {
        if !self.is_finite() {
            return Err(Error::Unsupported(format!(
                "cannot enumerate the continuous {} lattice",
                self.kind_name()
            )));
        }
        if self.cardinality().is_none() {
            return Err(Error::Unsupported(format!(
                "lattice exceeds the enumeration limit of {ENUMERATION_LIMIT} elements"
            )));
        }
        Ok(match &self.kind {
            LatticeKind::FiniteSet { universe } => (0..1usize << universe.len())
                .map(|mask| LatticeValue::Set((0..universe.len()).filter(|i| mask >> i & 1 == 1).collect()))
                .collect(),
            LatticeKind::Downset { poset } => {
                let mut all = poset.downsets();
                all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
                all.into_iter().map(LatticeValue::Downset).collect()
            }
            LatticeKind::Product { components } => {
                let mut acc: Vec<Vec<LatticeValue>> = vec![Vec::new()];
                for c in components {
                    let elems = c.enumerate()?;
                    acc = acc
                        .into_iter()
                        .flat_map(|prefix| {
                            elems.iter().map(move |e| {
                                let mut next = prefix.clone();
                                next.push(e.clone());
                                next
                            })
                        })
                        .collect();
                }
                acc.into_iter().map(LatticeValue::Tuple).collect()
            }
            _ => unreachable!("continuous kinds rejected above"),
        })
    }

    /// Residual metric: absolute difference on scalars, maximum over
    /// components, symmetric difference size on sets and downsets.
    pub fn distance(&self, a: &LatticeValue, b: &LatticeValue) -> Result<f64> {
        Ok(match (&self.kind, a, b) {
            (
                LatticeKind::ExtendedNonneg | LatticeKind::Bounded { .. },
                LatticeValue::Scalar(x),
                LatticeValue::Scalar(y),
            ) => scalar_distance(*x, *y),
            (LatticeKind::Product { components }, LatticeValue::Tuple(xs), LatticeValue::Tuple(ys)) => {
                self.check_arity(components, xs, ys)?;
                let mut d: f64 = 0.0;
                for ((c, x), y) in components.iter().zip(xs).zip(ys) {
                    d = d.max(c.distance(x, y)?);
                }
                d
            }
            (LatticeKind::FiniteSet { .. }, LatticeValue::Set(x), LatticeValue::Set(y))
            | (LatticeKind::Downset { .. }, LatticeValue::Downset(x), LatticeValue::Downset(y)) => {
                x.symmetric_difference_len(y) as f64
            }
            (LatticeKind::UnitVector { dim }, LatticeValue::Vector(xs), LatticeValue::Vector(ys)) => {
                self.check_dim(*dim, xs, ys)?;
                xs.iter().zip(ys).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
            }
            _ => return Err(self.pair_mismatch(a, b)),
        })
    }

    /// Whether `a` and `b` agree within `tol` on continuous leaves and
    /// exactly on finite ones.
    pub fn close(&self, a: &LatticeValue, b: &LatticeValue, tol: f64) -> Result<bool> {
        Ok(match (&self.kind, a, b) {
            (
                LatticeKind::ExtendedNonneg | LatticeKind::Bounded { .. },
                LatticeValue::Scalar(x),
                LatticeValue::Scalar(y),
            ) => scalar_distance(*x, *y) <= tol,
            (LatticeKind::Product { components }, LatticeValue::Tuple(xs), LatticeValue::Tuple(ys)) => {
                self.check_arity(components, xs, ys)?;
                for ((c, x), y) in components.iter().zip(xs).zip(ys) {
                    if !c.close(x, y, tol)? {
                        return Ok(false);
                    }
                }
                true
            }
            (LatticeKind::FiniteSet { .. }, LatticeValue::Set(x), LatticeValue::Set(y))
            | (LatticeKind::Downset { .. }, LatticeValue::Downset(x), LatticeValue::Downset(y)) => x == y,
            (LatticeKind::UnitVector { dim }, LatticeValue::Vector(xs), LatticeValue::Vector(ys)) => {
                self.check_dim(*dim, xs, ys)?;
                xs.iter().zip(ys).all(|(x, y)| (x - y).abs() <= tol)
            }
            _ => return Err(self.pair_mismatch(a, b)),
        })
    }

    /// Clips rounding noise so that a nearly-conforming value conforms.
    pub fn clamp(&self, v: LatticeValue) -> LatticeValue {
        match (&self.kind, v) {
            (LatticeKind::ExtendedNonneg, LatticeValue::Scalar(x)) => LatticeValue::Scalar(x.max(0.0)),
            (LatticeKind::Bounded { upper }, LatticeValue::Scalar(x)) => LatticeValue::Scalar(x.clamp(0.0, *upper)),
            (LatticeKind::Product { components }, LatticeValue::Tuple(xs)) if xs.len() == components.len() => {
                LatticeValue::Tuple(components.iter().zip(xs).map(|(c, x)| c.clamp(x)).collect())
            }
            (LatticeKind::UnitVector { .. }, LatticeValue::Vector(xs)) => {
                LatticeValue::Vector(xs.into_iter().map(|x| x.clamp(0.0, 1.0)).collect())
            }
            (_, v) => v,
        }
    }

    /// A random element. Scalars are drawn from `[0, scale]` with extra mass
    /// on the endpoints and on a coarse grid so that ties occur.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> LatticeValue {
        let real = |rng: &mut R, hi: f64| -> f64 {
            let r: f64 = rng.gen();
            if r < 0.1 {
                0.0
            } else if r < 0.2 {
                hi
            } else if r < 0.45 {
                hi * f64::from(rng.gen_range(0..=4u8)) / 4.0
            } else {
                rng.gen_range(0.0..=hi)
            }
        };
        match &self.kind {
            LatticeKind::ExtendedNonneg => {
                if rng.gen_bool(0.1) {
                    LatticeValue::Scalar(f64::INFINITY)
                } else {
                    LatticeValue::Scalar(real(rng, scale))
                }
            }
            LatticeKind::Bounded { upper } => LatticeValue::Scalar(real(rng, *upper)),
            LatticeKind::Product { components } => {
                LatticeValue::Tuple(components.iter().map(|c| c.sample(rng, scale)).collect())
            }
            LatticeKind::FiniteSet { universe } => {
                LatticeValue::Set((0..universe.len()).filter(|_| rng.gen_bool(0.5)).collect())
            }
            LatticeKind::UnitVector { dim } => LatticeValue::Vector((0..*dim).map(|_| real(rng, 1.0)).collect()),
            LatticeKind::Downset { poset } => {
                let seed: BitSet = (0..poset.len()).filter(|_| rng.gen_bool(0.3)).collect();
                LatticeValue::Downset(poset.downclosure(&seed))
            }
        }
    }

    /// Builds a set or downset value from universe labels.
    pub fn value_of_labels(&self, labels: &[&str]) -> Result<LatticeValue> {
        let universe = self
            .labels()
            .ok_or_else(|| Error::DescriptorMismatch(format!("{} lattice has no labels", self.kind_name())))?;
        let mut bits = BitSet::new();
        for l in labels {
            let i = universe
                .iter()
                .position(|u| u == l)
                .ok_or_else(|| Error::InvalidValue(format!("unknown label `{l}`")))?;
            bits.insert(i);
        }
        let v = match self.kind {
            LatticeKind::Downset { .. } => LatticeValue::Downset(bits),
            _ => LatticeValue::Set(bits),
        };
        self.conforms(&v)?;
        Ok(v)
    }

    /// Human-readable form with set members shown by label.
    pub fn render(&self, v: &LatticeValue) -> String {
        match (&self.kind, v) {
            (LatticeKind::Product { components }, LatticeValue::Tuple(xs)) if xs.len() == components.len() => {
                let parts: Vec<String> = components.iter().zip(xs).map(|(c, x)| c.render(x)).collect();
                format!("({})", parts.join(", "))
            }
            (LatticeKind::FiniteSet { .. }, LatticeValue::Set(s))
            | (LatticeKind::Downset { .. }, LatticeValue::Downset(s)) => {
                let universe = self.labels().unwrap_or(&[]);
                let names: Vec<&str> = s.iter().map(|i| universe.get(i).map_or("?", String::as_str)).collect();
                format!("{{{}}}", names.join(", "))
            }
            _ => v.to_string(),
        }
    }
}
