//! Cartesian products of constant-curvature component spaces.
//!
//! A product space is described by its signature, e.g. `h4x2,s4x2,e8` for
//! (H⁴)² × (S⁴)² × E⁸. Curved components carry a trainable raw curvature
//! realized as κ = ±exp(raw), which keeps the space kind fixed while the
//! magnitude is learned.

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{ccs_distance, Curvature, ManifoldVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    Hyperbolic,
    Spherical,
    Euclidean,
}

impl SpaceKind {
    pub fn letter(&self) -> char {
        match self {
            SpaceKind::Hyperbolic => 'h',
            SpaceKind::Spherical => 's',
            SpaceKind::Euclidean => 'e',
        }
    }

    /// Sign applied to exp(raw): −1, +1 or 0.
    pub fn sign(&self) -> f64 {
        match self {
            SpaceKind::Hyperbolic => -1.0,
            SpaceKind::Spherical => 1.0,
            SpaceKind::Euclidean => 0.0,
        }
    }
}

/// One component space of the product.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentSpec {
    pub kind: SpaceKind,
    pub dim: usize,
    /// Trainable parameter; κ = sign·exp(raw). Ignored for Euclidean.
    pub raw_curvature: f64,
}

impl ComponentSpec {
    pub fn new(kind: SpaceKind, dim: usize) -> Self {
        ComponentSpec { kind, dim, raw_curvature: 0.0 }
    }

    pub fn curvature(&self) -> Curvature {
        realize_raw(self.kind, self.raw_curvature)
    }
}

/// Realizes a raw parameter into a curvature without ever flipping sign.
pub fn realize_raw(kind: SpaceKind, raw: f64) -> Curvature {
    let kappa = match kind {
        SpaceKind::Euclidean => 0.0,
        _ => kind.sign() * raw.exp(),
    };
    Curvature::new(kappa).expect("exp(raw) finite for finite raw")
}

/// Ordered list of component spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct Signature {
    components: Vec<ComponentSpec>,
    total_dim: usize,
}

impl Signature {
    pub fn new(components: Vec<ComponentSpec>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Signature("empty signature".into()));
        }
        let euclidean = components.iter().filter(|c| c.kind == SpaceKind::Euclidean).count();
        if euclidean > 1 {
            return Err(Error::Signature(
                "at most one Euclidean component (products of Euclidean spaces collapse)".into(),
            ));
        }
        if components.iter().any(|c| c.dim == 0) {
            return Err(Error::Signature("zero-dimensional component".into()));
        }
        let total_dim = components.iter().map(|c| c.dim).sum();
        Ok(Signature { components, total_dim })
    }

    pub fn components(&self) -> &[ComponentSpec] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Byte offset of each component slice in the concatenated layout.
    pub fn offsets(&self) -> Vec<usize> {
        let mut offs = Vec::with_capacity(self.components.len());
        let mut acc = 0;
        for c in &self.components {
            offs.push(acc);
            acc += c.dim;
        }
        offs
    }

    pub fn curvatures(&self) -> Vec<Curvature> {
        self.components.iter().map(|c| c.curvature()).collect()
    }

    pub fn set_raw_curvature(&mut self, idx: usize, raw: f64) {
        self.components[idx].raw_curvature = raw;
    }

    /// Splits a flat vector into per-component manifold points.
    pub fn split(&self, flat: &[f64]) -> Result<ProductPoint> {
        if flat.len() != self.total_dim {
            return Err(Error::shape(format!(
                "vector of length {} for signature of total dim {}",
                flat.len(),
                self.total_dim
            )));
        }
        let mut slices = Vec::with_capacity(self.components.len());
        let mut off = 0;
        for c in &self.components {
            slices.push(ManifoldVector::new(flat[off..off + c.dim].to_vec(), c.curvature()));
            off += c.dim;
        }
        Ok(ProductPoint { slices })
    }

    pub fn origin(&self) -> ProductPoint {
        ProductPoint {
            slices: self
                .components
                .iter()
                .map(|c| ManifoldVector::origin(c.dim, c.curvature()))
                .collect(),
        }
    }
}

impl fmt::Display for Signature {
    /// Canonical text: consecutive identical (kind, dim) components are
    /// folded into `<kind><dim>x<count>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut i = 0;
        while i < self.components.len() {
            let c = &self.components[i];
            let mut count = 1;
            while i + count < self.components.len() {
                let n = &self.components[i + count];
                if n.kind == c.kind && n.dim == c.dim {
                    count += 1;
                } else {
                    break;
                }
            }
            if !first {
                write!(f, ",")?;
            }
            first = false;
            if count > 1 {
                write!(f, "{}{}x{}", c.kind.letter(), c.dim, count)?;
            } else {
                write!(f, "{}{}", c.kind.letter(), c.dim)?;
            }
            i += count;
        }
        Ok(())
    }
}

/// Parses signature text: `comp(,comp)*` where comp = `[hse]<dim>[x<count>]`.
pub fn parse_signature(text: &str) -> Result<Signature> {
    let mut components = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err(Error::Signature(format!("empty component in {text:?}")));
        }
        let kind = match part.chars().next().unwrap().to_ascii_lowercase() {
            'h' => SpaceKind::Hyperbolic,
            's' => SpaceKind::Spherical,
            'e' => SpaceKind::Euclidean,
            c => return Err(Error::Signature(format!("unknown space kind {c:?} in {part:?}"))),
        };
        let rest = &part[1..];
        let (dim_str, count_str) = match rest.split_once(['x', 'X']) {
            Some((d, c)) => (d, Some(c)),
            None => (rest, None),
        };
        let dim: usize = dim_str
            .parse()
            .map_err(|_| Error::Signature(format!("bad dimension {dim_str:?} in {part:?}")))?;
        if dim == 0 {
            return Err(Error::Signature(format!("zero dimension in {part:?}")));
        }
        let count = match count_str {
            None => 1,
            Some(s) => {
                let n: usize = s
                    .parse()
                    .map_err(|_| Error::Signature(format!("bad repeat count {s:?} in {part:?}")))?;
                if n == 0 {
                    return Err(Error::Signature(format!("zero repeat count in {part:?}")));
                }
                n
            }
        };
        for _ in 0..count {
            components.push(ComponentSpec::new(kind, dim));
        }
    }
    Signature::new(components)
}

/// One embedding split into per-component manifold points.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPoint {
    slices: Vec<ManifoldVector>,
}

impl ProductPoint {
    pub fn from_slices(slices: Vec<ManifoldVector>) -> Self {
        ProductPoint { slices }
    }

    pub fn slices(&self) -> &[ManifoldVector] {
        &self.slices
    }

    pub fn concat(&self) -> Vec<f64> {
        let mut flat = Vec::new();
        for s in &self.slices {
            flat.extend_from_slice(s.coords());
        }
        flat
    }
}

/// Squared product distance: sum over components of squared geodesic distance.
pub fn product_sq_distance(a: &ProductPoint, b: &ProductPoint) -> Result<f64> {
    if a.slices.len() != b.slices.len() {
        return Err(Error::shape("product points with different component counts"));
    }
    let mut total = 0.0;
    for (x, y) in a.slices.iter().zip(&b.slices) {
        if x.kappa() != y.kappa() || x.dim() != y.dim() {
            return Err(Error::invalid("product points from different signatures"));
        }
        let d = ccs_distance(x, y);
        total += d * d;
    }
    Ok(total)
}
