//! Planar coordinate transformations `x = f(u, v)`, `y = g(u, v)`.
//!
//! A transformation produces a position-dependent-mass problem only when the
//! crossed second-derivative term of the transformed Laplacian vanishes and
//! both diagonal terms carry the same factor:
//!
//! ```text
//! g_u g_v + f_u f_v = 0,    f_u² + g_u² = f_v² + g_v²
//! ```
//!
//! which forces `f_v = ±g_u`, `f_u = ∓g_v`. The common factor
//! `h² = f_u² + g_u²` is the scale factor and equals `|J|`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Branch of the Cauchy-Riemann-type relations.
///
/// `Minus` means `f_u = -g_v`, `f_v = +g_u` (orientation reversing, `J < 0`);
/// `Plus` means `f_u = +g_v`, `f_v = -g_u` (`J > 0`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Branch {
    #[default]
    Minus,
    Plus,
}

impl Branch {
    /// Sign of the Jacobian for maps on this branch.
    pub fn orientation(self) -> f64 {
        match self {
            Branch::Minus => -1.0,
            Branch::Plus => 1.0,
        }
    }
}

/// Parameters of the second-degree polynomial family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolynomialParams {
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
    pub branch: Branch,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MapKind {
    Identity,
    Polynomial(PolynomialParams),
    /// `f = uv`, `g = (u² - v²)/2`.
    ParabolicCylinder,
    /// `f = a sinh u sin v`, `g = a cosh u cos v`.
    EllipticCylinder { a: f64 },
    /// `f = a sinh u / (cosh u - cos v)`, `g = a sin v / (cosh u - cos v)`.
    Bipolar { a: f64 },
}

/// How the `(u, v)` plane covers the `(x, y)` plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Covering {
    SingleCover,
    /// Every `(x, y)` has two preimages `w` and `-w`.
    DoubleCover,
    PeriodicInV { period: f64 },
}

/// Sub-domain of the `(u, v)` plane that maps onto the `(x, y)` plane once,
/// up to a set of measure zero. Bounds may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FundamentalDomain {
    pub u: (f64, f64),
    pub v: (f64, f64),
}

impl FundamentalDomain {
    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u.0 && u <= self.u.1 && v >= self.v.0 && v <= self.v.1
    }
}

/// First partial derivatives of a transformation at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Partials {
    pub fu: f64,
    pub fv: f64,
    pub gu: f64,
    pub gv: f64,
}

impl Partials {
    /// Signed Jacobian `f_u g_v - g_u f_v`.
    pub fn jacobian(&self) -> f64 {
        self.fu * self.gv - self.gu * self.fv
    }

    /// `h² = f_u² + g_u²`.
    pub fn scale_factor(&self) -> f64 {
        self.fu * self.fu + self.gu * self.gu
    }

    /// `f_v² + g_v²`, equal to [`Partials::scale_factor`] for conformal maps.
    pub fn scale_factor_v(&self) -> f64 {
        self.fv * self.fv + self.gv * self.gv
    }

    /// Coefficient of the crossed term, `g_u g_v + f_u f_v`.
    pub fn cross_term(&self) -> f64 {
        self.gu * self.gv + self.fu * self.fv
    }
}

/// Anything that maps `(u, v)` to `(x, y)` with known first derivatives.
///
/// The built-in maps are [`CoordinateMap`]s; user maps implement this trait
/// and go through [`validate_conformal`] before being trusted.
pub trait Transformation {
    fn evaluate(&self, u: f64, v: f64) -> Result<(f64, f64)>;

    fn partials(&self, u: f64, v: f64) -> Result<Partials>;

    fn jacobian(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.partials(u, v)?.jacobian())
    }

    fn scale_factor(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.partials(u, v)?.scale_factor())
    }
}

/// Denominator magnitude below which the bipolar map is treated as singular.
const BIPOLAR_SINGULAR: f64 = 1e-14;

/// A validated built-in coordinate map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoordinateMap {
    kind: MapKind,
}

impl CoordinateMap {
    pub fn new(kind: MapKind) -> Result<Self> {
        match kind {
            MapKind::Polynomial(p) => {
                if [p.c1, p.c2, p.d1, p.d2].iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "polynomial coefficients must be finite".into(),
                    ));
                }
                if p.c1 == 0.0 && p.c2 == 0.0 {
                    return Err(Error::InvalidParameter(
                        "polynomial map needs c1 or c2 nonzero".into(),
                    ));
                }
            }
            MapKind::EllipticCylinder { a } | MapKind::Bipolar { a } => {
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "focal parameter a must be positive, got {a}"
                    )));
                }
            }
            MapKind::Identity | MapKind::ParabolicCylinder => {}
        }
        Ok(Self { kind })
    }

    pub fn identity() -> Self {
        Self {
            kind: MapKind::Identity,
        }
    }

    pub fn parabolic_cylinder() -> Self {
        Self {
            kind: MapKind::ParabolicCylinder,
        }
    }

    pub fn polynomial(c1: f64, c2: f64, d1: f64, d2: f64, branch: Branch) -> Result<Self> {
        Self::new(MapKind::Polynomial(PolynomialParams {
            c1,
            c2,
            d1,
            d2,
            branch,
        }))
    }

    pub fn elliptic_cylinder(a: f64) -> Result<Self> {
        Self::new(MapKind::EllipticCylinder { a })
    }

    pub fn bipolar(a: f64) -> Result<Self> {
        Self::new(MapKind::Bipolar { a })
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            MapKind::Identity => "identity",
            MapKind::Polynomial(_) => "polynomial",
            MapKind::ParabolicCylinder => "parabolic-cylinder",
            MapKind::EllipticCylinder { .. } => "elliptic-cylinder",
            MapKind::Bipolar { .. } => "bipolar",
        }
    }

    /// Sign of the Jacobian, constant over the whole domain of each built-in map.
    pub fn orientation(&self) -> f64 {
        match self.kind {
            MapKind::Identity => 1.0,
            MapKind::Polynomial(p) => p.branch.orientation(),
            MapKind::ParabolicCylinder
            | MapKind::EllipticCylinder { .. }
            | MapKind::Bipolar { .. } => -1.0,
        }
    }

    pub fn covering(&self) -> Covering {
        match self.kind {
            MapKind::Identity => Covering::SingleCover,
            MapKind::Polynomial(_) | MapKind::ParabolicCylinder => Covering::DoubleCover,
            MapKind::EllipticCylinder { .. } | MapKind::Bipolar { .. } => {
                Covering::PeriodicInV { period: TAU }
            }
        }
    }

    pub fn fundamental_domain(&self) -> FundamentalDomain {
        let inf = f64::INFINITY;
        match self.kind {
            MapKind::Identity => FundamentalDomain {
                u: (-inf, inf),
                v: (-inf, inf),
            },
            MapKind::Polynomial(_) | MapKind::ParabolicCylinder => FundamentalDomain {
                u: (-inf, inf),
                v: (0.0, inf),
            },
            MapKind::EllipticCylinder { .. } => FundamentalDomain {
                u: (0.0, inf),
                v: (0.0, TAU),
            },
            MapKind::Bipolar { .. } => FundamentalDomain {
                u: (-inf, inf),
                v: (0.0, TAU),
            },
        }
    }

    /// Points of the `(u, v)` plane where the map itself is undefined.
    pub fn excluded_points(&self) -> &'static str {
        match self.kind {
            MapKind::Bipolar { .. } => "(0, 2πk): cosh u = cos v, image at infinity",
            _ => "none",
        }
    }

    /// Points where `h² = 0` (finite image, vanishing metric).
    pub fn degenerate_points(&self) -> &'static str {
        match self.kind {
            MapKind::Identity | MapKind::Bipolar { .. } => "none",
            MapKind::Polynomial(_) | MapKind::ParabolicCylinder => "(0, 0)",
            MapKind::EllipticCylinder { .. } => "(0, kπ)",
        }
    }

    fn check(&self, u: f64, v: f64) -> Result<()> {
        if !(u.is_finite() && v.is_finite()) {
            return Err(Error::OutsideDomain {
                map: self.name(),
                u,
                v,
            });
        }
        if let MapKind::Bipolar { .. } = self.kind {
            if (u.cosh() - v.cos()).abs() < BIPOLAR_SINGULAR {
                return Err(Error::Singular {
                    map: self.name(),
                    u,
                    v,
                });
            }
        }
        Ok(())
    }
}

impl Transformation for CoordinateMap {
    fn evaluate(&self, u: f64, v: f64) -> Result<(f64, f64)> {
        self.check(u, v)?;
        Ok(match self.kind {
            MapKind::Identity => (u, v),
            MapKind::Polynomial(p) => {
                let b = -p.branch.orientation();
                let half_diff = 0.5 * (u * u - v * v);
                (
                    -b * p.c2 * half_diff + p.c1 * u * v + p.d1,
                    b * p.c1 * half_diff + p.c2 * u * v + p.d2,
                )
            }
            MapKind::ParabolicCylinder => (u * v, 0.5 * (u * u - v * v)),
            MapKind::EllipticCylinder { a } => (a * u.sinh() * v.sin(), a * u.cosh() * v.cos()),
            MapKind::Bipolar { a } => {
                let d = u.cosh() - v.cos();
                (a * u.sinh() / d, a * v.sin() / d)
            }
        })
    }

    fn partials(&self, u: f64, v: f64) -> Result<Partials> {
        self.check(u, v)?;
        Ok(match self.kind {
            MapKind::Identity => Partials {
                fu: 1.0,
                fv: 0.0,
                gu: 0.0,
                gv: 1.0,
            },
            MapKind::Polynomial(p) => {
                let b = -p.branch.orientation();
                Partials {
                    fu: -b * p.c2 * u + p.c1 * v,
                    fv: b * p.c2 * v + p.c1 * u,
                    gu: b * p.c1 * u + p.c2 * v,
                    gv: -b * p.c1 * v + p.c2 * u,
                }
            }
            MapKind::ParabolicCylinder => Partials {
                fu: v,
                fv: u,
                gu: u,
                gv: -v,
            },
            MapKind::EllipticCylinder { a } => {
                let (sh, ch) = (u.sinh(), u.cosh());
                let (s, c) = v.sin_cos();
                Partials {
                    fu: a * ch * s,
                    fv: a * sh * c,
                    gu: a * sh * c,
                    gv: -a * ch * s,
                }
            }
            MapKind::Bipolar { a } => {
                let (sh, ch) = (u.sinh(), u.cosh());
                let (s, c) = v.sin_cos();
                let d2 = (ch - c) * (ch - c);
                let fu = a * (1.0 - ch * c) / d2;
                let fv = -a * sh * s / d2;
                Partials {
                    fu,
                    fv,
                    gu: fv,
                    gv: -fu,
                }
            }
        })
    }
}

/// Outcome of [`validate_conformal`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalReport {
    pub checked: usize,
    /// Largest `|g_u g_v + f_u f_v| / h²` seen.
    pub worst_cross: f64,
    /// Largest `|(f_u² + g_u²) - (f_v² + g_v²)| / h²` seen.
    pub worst_scale: f64,
    /// Point of the largest violation of either condition.
    pub worst_point: Option<(f64, f64)>,
    /// Points with `h² = 0`; skipped by the relative test.
    pub degenerate: Vec<(f64, f64)>,
    /// Points the map refused to evaluate.
    pub rejected: Vec<(f64, f64)>,
    pub tolerance: f64,
}

impl ConformalReport {
    pub fn worst(&self) -> f64 {
        self.worst_cross.max(self.worst_scale)
    }

    pub fn passed(&self) -> bool {
        self.worst() <= self.tolerance && self.rejected.is_empty() && self.checked > 0
    }
}

/// Relative tolerance of the conformal constraints.
pub const CONFORMAL_TOL: f64 = 1e-9;

const DEGENERATE_H2: f64 = 1e-24;

/// Checks the crossed-term and equal-scale constraints at every sample point.
pub fn validate_conformal<T: Transformation + ?Sized>(
    map: &T,
    points: &[(f64, f64)],
) -> ConformalReport {
    let mut report = ConformalReport {
        checked: 0,
        worst_cross: 0.0,
        worst_scale: 0.0,
        worst_point: None,
        degenerate: Vec::new(),
        rejected: Vec::new(),
        tolerance: CONFORMAL_TOL,
    };
    let mut worst = -1.0;
    for &(u, v) in points {
        let p = match map.partials(u, v) {
            Ok(p) => p,
            Err(_) => {
                report.rejected.push((u, v));
                continue;
            }
        };
        report.checked += 1;
        let h2 = p.scale_factor();
        let cross = p.cross_term().abs();
        let scale = (p.scale_factor() - p.scale_factor_v()).abs();
        if h2 <= DEGENERATE_H2 {
            report.degenerate.push((u, v));
            if cross > DEGENERATE_H2 || scale > DEGENERATE_H2 {
                // vanishing h² but nonzero violation: cannot be conformal
                report.worst_cross = f64::INFINITY;
                report.worst_point = Some((u, v));
            }
            continue;
        }
        let (rc, rs) = (cross / h2, scale / h2);
        report.worst_cross = report.worst_cross.max(rc);
        report.worst_scale = report.worst_scale.max(rs);
        if rc.max(rs) > worst {
            worst = rc.max(rs);
            report.worst_point = Some((u, v));
        }
    }
    report
}

/// Coefficients of the first-order terms of the transformed Laplacian,
/// normalized by the magnitude of their constituent terms.
///
/// The partial derivatives of `g_v/J`, `f_v/J`, `g_u/J`, `f_u/J` are taken by
/// central differences of the analytic partials with the given step. For a
/// conformal map with harmonic components both coefficients vanish.
pub fn first_order_terms<T: Transformation + ?Sized>(
    map: &T,
    u: f64,
    v: f64,
    step: f64,
) -> Result<(f64, f64)> {
    let p = map.partials(u, v)?;
    let ratios = |u: f64, v: f64| -> Result<[f64; 4]> {
        let q = map.partials(u, v)?;
        let jq = q.jacobian();
        Ok([q.gv / jq, q.fv / jq, q.gu / jq, q.fu / jq])
    };
    let (up, um) = (ratios(u + step, v)?, ratios(u - step, v)?);
    let (vp, vm) = (ratios(u, v + step)?, ratios(u, v - step)?);
    let du = |k: usize| (up[k] - um[k]) / (2.0 * step);
    let dv = |k: usize| (vp[k] - vm[k]) / (2.0 * step);

    let terms_u = [
        p.gv * du(0),
        -p.gu * dv(0),
        p.fv * du(1),
        -p.fu * dv(1),
    ];
    let terms_v = [
        p.gu * dv(2),
        -p.gv * du(2),
        p.fu * dv(3),
        -p.fv * du(3),
    ];
    let rel = |t: &[f64; 4]| {
        let sum: f64 = t.iter().sum();
        let mag: f64 = t.iter().map(|x| x.abs()).sum();
        if mag == 0.0 {
            0.0
        } else {
            sum.abs() / mag
        }
    };
    Ok((rel(&terms_u), rel(&terms_v)))
}
