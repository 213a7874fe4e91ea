//! Registry of inequality and identity checks: admissible parameter
//! regions, evaluation over sampled functions, and the special-form checks
//! (boundary-value kernel bound, Gaussian isoperimetric profile).
//!
//! Every check reduces to one scalar ratio lhs/rhs so results stay
//! comparable across resolutions: pointwise families take the max of the
//! pointwise ratio over the t grid, cumulative families the max of the
//! cumulative ratio, norm inequalities the single norm ratio.

use std::cell::{OnceCell, RefCell};
use std::collections::HashMap;

use crate::calculus::{self, DerivativeField};
use crate::corpus::ShapeSpec;
use crate::functionals::{
    self, besov_from_curve, LorentzExponents, ModulusCurve, NormAnchor,
};
use crate::mesh::{Domain, MeasureSpec, SampledFunction};
use crate::normal;
use crate::rearrange::{self, RearrangementProfile};
use crate::{Error, Result};

/// Identifiers of every inequality/identity in the registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InequalityId {
    Sob1,
    Sob2Pt,
    Sobk,
    Sobsup,
    Dav1,
    Steine,
    Deacuerdo,
    Hbr,
    HbwCmp,
    Comparada,
    GnStrong,
    GnClassical,
    GnWeak,
    V2,
    V3,
    V4,
    V5Int,
    Iso,
    V6Gauss,
    FracNueva,
    FracThm,
    FracNueva2,
    FracLorentz,
    Stein2,
    Stein3,
    IdFrom,
    IdProduct,
    IdNumer,
}

impl InequalityId {
    pub const ALL: [InequalityId; 28] = [
        InequalityId::Sob1,
        InequalityId::Sob2Pt,
        InequalityId::Sobk,
        InequalityId::Sobsup,
        InequalityId::Dav1,
        InequalityId::Steine,
        InequalityId::Deacuerdo,
        InequalityId::Hbr,
        InequalityId::HbwCmp,
        InequalityId::Comparada,
        InequalityId::GnStrong,
        InequalityId::GnClassical,
        InequalityId::GnWeak,
        InequalityId::V2,
        InequalityId::V3,
        InequalityId::V4,
        InequalityId::V5Int,
        InequalityId::Iso,
        InequalityId::V6Gauss,
        InequalityId::FracNueva,
        InequalityId::FracThm,
        InequalityId::FracNueva2,
        InequalityId::FracLorentz,
        InequalityId::Stein2,
        InequalityId::Stein3,
        InequalityId::IdFrom,
        InequalityId::IdProduct,
        InequalityId::IdNumer,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            InequalityId::Sob1 => "SOB1",
            InequalityId::Sob2Pt => "SOB2_PT",
            InequalityId::Sobk => "SOBK",
            InequalityId::Sobsup => "SOBSUP",
            InequalityId::Dav1 => "DAV1",
            InequalityId::Steine => "STEINE",
            InequalityId::Deacuerdo => "DEACUERDO",
            InequalityId::Hbr => "HBR",
            InequalityId::HbwCmp => "HBW_CMP",
            InequalityId::Comparada => "COMPARADA",
            InequalityId::GnStrong => "GN_STRONG",
            InequalityId::GnClassical => "GN_CLASSICAL",
            InequalityId::GnWeak => "GN_WEAK",
            InequalityId::V2 => "V2",
            InequalityId::V3 => "V3",
            InequalityId::V4 => "V4",
            InequalityId::V5Int => "V5_INT",
            InequalityId::Iso => "ISO",
            InequalityId::V6Gauss => "V6_GAUSS",
            InequalityId::FracNueva => "FRAC_NUEVA",
            InequalityId::FracThm => "FRAC_THM",
            InequalityId::FracNueva2 => "FRAC_NUEVA2",
            InequalityId::FracLorentz => "FRAC_LORENTZ",
            InequalityId::Stein2 => "STEIN2",
            InequalityId::Stein3 => "STEIN3",
            InequalityId::IdFrom => "ID_FROM",
            InequalityId::IdProduct => "ID_PRODUCT",
            InequalityId::IdNumer => "ID_NUMER",
        }
    }
}

impl std::str::FromStr for InequalityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        InequalityId::ALL
            .iter()
            .find(|id| id.as_str() == s)
            .copied()
            .ok_or_else(|| Error::UnknownId(s.to_string()))
    }
}

impl std::fmt::Display for InequalityId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters of one check. `p`, `q`, `r` use `f64::INFINITY` for ∞;
/// `alpha` only applies to fractional ids; `omega` is the measure of Ω for
/// domain-relative ids (defaults to the full box).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityParams {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub q: f64,
    pub alpha: Option<f64>,
    pub r: Option<f64>,
    pub omega: Option<f64>,
}

impl Default for InequalityParams {
    fn default() -> Self {
        InequalityParams { n: 1, k: 1, p: 1.0, q: 1.0, alpha: None, r: None, omega: None }
    }
}

impl InequalityParams {
    pub fn new(n: usize, k: usize, p: f64, q: f64) -> Self {
        InequalityParams { n, k, p, q, ..Default::default() }
    }

    /// Sobolev exponent via 1/p̄ = 1/p - k/n (or - alpha/n when fractional).
    pub fn pbar(&self, fractional: bool) -> f64 {
        let shift = if fractional {
            self.alpha.unwrap_or(0.0) / self.n as f64
        } else {
            self.k as f64 / self.n as f64
        };
        let inv = 1.0 / self.p - shift;
        if inv <= 1e-12 {
            f64::INFINITY
        } else {
            1.0 / inv
        }
    }

    fn key_part(x: f64) -> String {
        if x.is_infinite() {
            "inf".into()
        } else {
            format!("{x}")
        }
    }

    /// Canonical key for budget files: id-independent parameter part.
    pub fn key(&self) -> String {
        let mut s = format!("n{}k{}p{}q{}", self.n, self.k, Self::key_part(self.p), Self::key_part(self.q));
        if let Some(a) = self.alpha {
            s.push_str(&format!("a{a}"));
        }
        if let Some(r) = self.r {
            s.push_str(&format!("r{}", Self::key_part(r)));
        }
        s
    }
}

/// Admissible parameter region of each id.
pub fn admissible(id: InequalityId, params: &InequalityParams) -> bool {
    let n = params.n;
    let nf = n as f64;
    let (k, p, q) = (params.k, params.p, params.q);
    let alpha_ok = params.alpha.map(|a| a > 0.0 && a < 1.0).unwrap_or(false);
    let base = p >= 1.0 && q >= 1.0;
    match id {
        // gradient case: (p,q) in (1,n] x [1,inf] or p = q = 1
        InequalityId::Sob1 => {
            n >= 1 && k == 1 && base && p <= nf && (p > 1.0 || q == 1.0)
        }
        // order k: k <= n, p <= n/k; k < n needs p>1 or p=q=1; k = n forces
        // p = q = 1
        InequalityId::Sobk => {
            k >= 1
                && k <= n
                && base
                && p <= nf / k as f64
                && if k < n { p > 1.0 || q == 1.0 } else { p == 1.0 && q == 1.0 }
        }
        // diagonal q = p has no exceptional cases
        InequalityId::Sobsup => k >= 1 && k <= n && base && p <= nf / k as f64 && q == p,
        InequalityId::Sob2Pt | InequalityId::V2 | InequalityId::V3 => n >= 1,
        InequalityId::Dav1 | InequalityId::V4 | InequalityId::V5Int => n >= 1,
        InequalityId::Steine => n >= 3,
        InequalityId::Deacuerdo => n >= 1 && k == n,
        InequalityId::Hbr => n >= 1 && q >= 1.0 && (n > 1 || q == 1.0),
        InequalityId::HbwCmp => n >= 2,
        InequalityId::Comparada => n >= 1,
        InequalityId::GnStrong | InequalityId::GnClassical | InequalityId::GnWeak => n >= 1,
        InequalityId::Iso => n >= 1,
        InequalityId::V6Gauss => n >= 1,
        InequalityId::FracNueva => alpha_ok && p >= 1.0 && p.is_finite(),
        InequalityId::FracThm => {
            alpha_ok && base && p.is_finite() && p <= nf / params.alpha.unwrap()
        }
        InequalityId::FracNueva2 => alpha_ok && q >= 1.0,
        InequalityId::FracLorentz => {
            let r = params.r.unwrap_or(p);
            alpha_ok
                && base
                && p.is_finite()
                && p <= nf / params.alpha.unwrap()
                && r >= 1.0
                && (p > 1.0 || r == 1.0)
        }
        InequalityId::Stein2 | InequalityId::Stein3 => n == 2,
        InequalityId::IdFrom | InequalityId::IdProduct | InequalityId::IdNumer => true,
    }
}

/// One evaluated check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub id: InequalityId,
    pub function_id: String,
    pub params: InequalityParams,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub budget: f64,
    pub pass: bool,
    pub notes: String,
}

fn json_num(x: f64) -> String {
    if x.is_infinite() {
        "\"inf\"".into()
    } else {
        format!("{x}")
    }
}

impl CheckResult {
    pub fn new(
        id: InequalityId,
        function_id: &str,
        params: InequalityParams,
        lhs: f64,
        rhs: f64,
        budget: f64,
        notes: String,
    ) -> Self {
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        CheckResult {
            id,
            function_id: function_id.to_string(),
            params,
            lhs,
            rhs,
            ratio,
            budget,
            pass: ratio <= budget,
            notes,
        }
    }

    /// Budget-file key: id plus canonical parameter string.
    pub fn key(&self) -> String {
        format!("{}|{}", self.id.as_str(), self.params.key())
    }

    /// One JSON line per the interchange contract.
    pub fn to_json_line(&self) -> String {
        let alpha = self.params.alpha.map(|a| format!("{a}")).unwrap_or_else(|| "null".into());
        let r = self.params.r.map(json_num).unwrap_or_else(|| "null".into());
        format!(
            "{{\"id\":\"{}\",\"function_id\":\"{}\",\"n\":{},\"k\":{},\"p\":{},\"q\":{},\"alpha\":{},\"r\":{},\"lhs\":{},\"rhs\":{},\"ratio\":{},\"budget\":{},\"pass\":{}}}",
            self.id.as_str(),
            self.function_id,
            self.params.n,
            self.params.k,
            json_num(self.params.p),
            json_num(self.params.q),
            alpha,
            r,
            json_num(self.lhs),
            json_num(self.rhs),
            json_num(self.ratio),
            json_num(self.budget),
            self.pass
        )
    }
}

/// Gaussian isoperimetric profile `I(t) = φ(N^{-1}(t))`, 0 < t < 1.
pub fn gaussian_profile(t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParams(format!("profile needs t in (0,1), got {t}")));
    }
    Ok(normal::pdf(normal::quantile(t)))
}

/// Lazy per-function cache of profiles, derivative fields, and moduli.
pub struct Evaluator<'a> {
    f: &'a SampledFunction,
    pub function_id: String,
    t_grid: Vec<f64>,
    domain: Option<&'a Domain>,
    shape: Option<&'a ShapeSpec>,
    profile: OnceCell<RearrangementProfile>,
    derivatives: RefCell<HashMap<usize, DerivativeField>>,
    deriv_profiles: RefCell<HashMap<usize, RearrangementProfile>>,
    moduli: RefCell<HashMap<(u64, u64), ModulusCurve>>,
    phi: OnceCell<Vec<f64>>,
}

const EPS_ZERO: f64 = 1e-300;

impl<'a> Evaluator<'a> {
    pub fn new(f: &'a SampledFunction, function_id: &str, t_grid: Vec<f64>) -> Result<Self> {
        crate::tgrid::validate(&t_grid)?;
        Ok(Evaluator {
            f,
            function_id: function_id.to_string(),
            t_grid,
            domain: None,
            shape: None,
            profile: OnceCell::new(),
            derivatives: RefCell::new(HashMap::new()),
            deriv_profiles: RefCell::new(HashMap::new()),
            moduli: RefCell::new(HashMap::new()),
            phi: OnceCell::new(),
        })
    }

    pub fn with_domain(mut self, domain: &'a Domain) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn with_shape(mut self, shape: &'a ShapeSpec) -> Self {
        self.shape = Some(shape);
        self
    }

    pub fn function(&self) -> &SampledFunction {
        self.f
    }

    pub fn profile(&self) -> &RearrangementProfile {
        self.profile
            .get_or_init(|| rearrange::rearrange(self.f, &self.t_grid).expect("validated grid"))
    }

    fn derivative(&self, k: usize) -> Result<()> {
        if !self.derivatives.borrow().contains_key(&k) {
            let d = calculus::higher_derivative_magnitude(self.f, k)?;
            let p = rearrange::rearrange(&d.magnitude, &self.t_grid)?;
            self.derivatives.borrow_mut().insert(k, d);
            self.deriv_profiles.borrow_mut().insert(k, p);
        }
        Ok(())
    }

    /// Profile of |D^k f| (k = 1 is the gradient).
    pub fn deriv_profile(&self, k: usize) -> Result<std::cell::Ref<'_, RearrangementProfile>> {
        self.derivative(k)?;
        Ok(std::cell::Ref::map(self.deriv_profiles.borrow(), |m| m.get(&k).unwrap()))
    }

    fn grad_l1(&self) -> Result<f64> {
        Ok(self.deriv_profile(1)?.mass)
    }

    fn modulus(&self, anchor: NormAnchor) -> Result<std::cell::Ref<'_, ModulusCurve>> {
        let key = match anchor {
            NormAnchor::Lp(p) => (p.to_bits(), p.to_bits()),
            NormAnchor::Lorentz(p, r) => (p.to_bits(), r.to_bits()),
        };
        if !self.moduli.borrow().contains_key(&key) {
            let c = functionals::modulus_curve(self.f, &anchor)?;
            self.moduli.borrow_mut().insert(key, c);
        }
        Ok(std::cell::Ref::map(self.moduli.borrow(), |m| m.get(&key).unwrap()))
    }

    fn level_cumulant(&self) -> Result<&[f64]> {
        if self.phi.get().is_none() {
            let phi = calculus::level_gradient_cumulant(self.f, self.profile())?;
            let _ = self.phi.set(phi);
        }
        Ok(self.phi.get().unwrap())
    }

    fn omega(&self, params: &InequalityParams) -> f64 {
        params
            .omega
            .or(self.domain.map(|d| d.measure))
            .unwrap_or_else(|| self.f.weights().iter().sum())
    }

    fn lorentz(&self, profile: &RearrangementProfile, p: f64, q: f64) -> Result<f64> {
        functionals::lorentz_norm(profile, LorentzExponents::new(p, q)?)
    }

    /// Max over the t grid of a pointwise lhs(t)/rhs(t) family.
    fn pointwise_max(
        &self,
        lhs: impl Fn(usize, f64) -> f64,
        rhs: impl Fn(usize, f64) -> f64,
    ) -> (f64, f64, f64) {
        let mut best = (0.0, 0.0, 0.0);
        let mut best_ratio = -1.0;
        for (i, &t) in self.t_grid.iter().enumerate() {
            let l = lhs(i, t);
            let r = rhs(i, t);
            let ratio = if r > EPS_ZERO {
                l / r
            } else if l > EPS_ZERO {
                f64::INFINITY
            } else {
                continue;
            };
            if ratio > best_ratio {
                best_ratio = ratio;
                best = (l, r, ratio);
            }
        }
        best
    }

    /// Evaluate one check; the zero function is reported as an error.
    pub fn check(&self, id: InequalityId, params: &InequalityParams, budget: f64) -> Result<CheckResult> {
        if !admissible(id, params) {
            return Err(Error::Inadmissible {
                id: id.as_str().into(),
                reason: admissible_note(id, params),
            });
        }
        if self.f.sup_norm() == 0.0 {
            return Err(Error::ZeroFunction);
        }
        let gaussian = self.f.measure() == MeasureSpec::Gaussian;
        if (id == InequalityId::V6Gauss) != gaussian
            && !matches!(id, InequalityId::IdFrom | InequalityId::IdProduct | InequalityId::IdNumer)
        {
            return Err(Error::InvalidParams(format!(
                "{} requires {} measure",
                id.as_str(),
                if id == InequalityId::V6Gauss { "gaussian" } else { "lebesgue" }
            )));
        }
        let fid = self.function_id.clone();
        let mk = |lhs: f64, rhs: f64, notes: String| {
            CheckResult::new(id, &fid, *params, lhs, rhs, budget, notes)
        };
        let nf = params.n as f64;

        match id {
            InequalityId::Sob1 => {
                let lhs = self.lorentz(self.profile(), params.pbar(false), params.q)?;
                let rhs = self.lorentz(&*self.deriv_profile(1)?, params.p, params.q)?;
                Ok(mk(lhs, rhs, String::new()))
            }
            InequalityId::Sobk | InequalityId::Sobsup => {
                let lhs = self.lorentz(self.profile(), params.pbar(false), params.q)?;
                let rhs = self.lorentz(&*self.deriv_profile(params.k)?, params.p, params.q)?;
                Ok(mk(lhs, rhs, String::new()))
            }
            InequalityId::Sob2Pt | InequalityId::V2 => {
                let pf = self.profile().clone();
                let pg = self.deriv_profile(1)?;
                let (l, r, _) = self.pointwise_max(
                    |i, _| pf.osc[i],
                    |i, t| t.powf(1.0 / nf) * pg.f_star_star[i],
                );
                Ok(mk(l, r, "max over t".into()))
            }
            InequalityId::V3 => {
                let pf = self.profile().clone();
                let pg = self.deriv_profile(1)?;
                let (l, r, _) = self.pointwise_max(
                    |i, t| pf.osc[i] * t.powf(1.0 - 1.0 / nf),
                    |_, t| pg.steps().cum_at(t),
                );
                Ok(mk(l, r, "max over t".into()))
            }
            InequalityId::Dav1 | InequalityId::V4 => {
                let pf = self.profile();
                let pg = self.deriv_profile(1)?;
                let steps = pf.steps();
                let (l, r, _) = self.pointwise_max(
                    |_, t| steps.osc_weighted_cumulative(t, nf),
                    |_, t| pg.steps().cum_at(t),
                );
                Ok(mk(l, r, "max cumulative ratio".into()))
            }
            InequalityId::V5Int => {
                let pf = self.profile();
                let drops = pf.steps().drops();
                let mut pref = Vec::with_capacity(drops.len());
                let mut acc = 0.0;
                for &(w, d) in &drops {
                    acc += w.powf(1.0 - 1.0 / nf) * d;
                    pref.push(acc);
                }
                let phi = self.level_cumulant()?.to_vec();
                let (l, r, _) = self.pointwise_max(
                    |_, t| {
                        let j = drops.partition_point(|&(w, _)| w <= t);
                        if j == 0 {
                            0.0
                        } else {
                            pref[j - 1]
                        }
                    },
                    |i, _| phi[i],
                );
                Ok(mk(l, r, "max cumulative ratio".into()))
            }
            InequalityId::Steine => {
                let lhs = self.profile().sup_norm;
                let rhs = self.lorentz(&*self.deriv_profile(2)?, nf / 2.0, 1.0)?;
                Ok(mk(lhs, rhs, String::new()))
            }
            InequalityId::Deacuerdo => {
                let lhs = self.profile().sup_norm;
                let rhs = self.deriv_profile(params.n)?.mass;
                Ok(mk(lhs, rhs, String::new()))
            }
            InequalityId::Hbr => {
                let lhs = self.lorentz(self.profile(), f64::INFINITY, params.q)?;
                let rhs = self.lorentz(&*self.deriv_profile(1)?, nf, params.q)?;
                Ok(mk(lhs, rhs, String::new()))
            }
            InequalityId::HbwCmp => {
                let omega = self.omega(params);
                let lhs = functionals::hbw_functional(self.profile(), omega, params.n)?;
                let rhs = functionals::normalized_linf_q(self.profile(), omega, nf)?;
                Ok(mk(lhs, rhs, format!("omega={omega}")))
            }
            InequalityId::Comparada => {
                let lhs = self.lorentz(self.profile(), f64::INFINITY, 1.0)?;
                let rhs = self.lorentz(&*self.deriv_profile(1)?, nf, 1.0)?;
                Ok(mk(lhs, rhs, String::new()))
            }
            InequalityId::GnStrong | InequalityId::GnClassical | InequalityId::GnWeak => {
                let nprime = if params.n == 1 { f64::INFINITY } else { nf / (nf - 1.0) };
                let lhs = match id {
                    InequalityId::GnStrong => self.lorentz(self.profile(), nprime, 1.0)?,
                    InequalityId::GnClassical => {
                        if nprime.is_finite() {
                            self.lorentz(self.profile(), nprime, nprime)?
                        } else {
                            self.profile().sup_norm
                        }
                    }
                    _ => self.lorentz(self.profile(), nprime, f64::INFINITY)?,
                };
                let rhs = self.grad_l1()?;
                Ok(mk(lhs, rhs, String::new()))
            }
            InequalityId::Iso => {
                let shape = self.shape.ok_or_else(|| {
                    Error::InvalidParams("ISO needs the mollified shape's analytic data".into())
                })?;
                let lhs = shape.measure_value.powf(1.0 - 1.0 / nf);
                let rhs = self.grad_l1()?;
                Ok(mk(lhs, rhs, format!("perimeter={}", shape.perimeter_value)))
            }
            InequalityId::V6Gauss => {
                let pf = self.profile().clone();
                let pg = self.deriv_profile(1)?;
                let (l, r, _) = self.pointwise_max(
                    |i, t| if t < 0.99 { pf.osc[i] } else { 0.0 },
                    |i, t| {
                        if t < 0.99 {
                            let profile_i = normal::pdf(normal::quantile(t));
                            t / profile_i * pg.f_star_star[i]
                        } else {
                            0.0
                        }
                    },
                );
                Ok(mk(l, r, "max over t in (0,1)".into()))
            }
            InequalityId::FracNueva => {
                let anchor = anchor_from(params);
                let curve = self.modulus(anchor)?.clone();
                let pf = self.profile();
                let inv_p = 1.0 / params.p;
                let (l, r, _) = self.pointwise_max(
                    |i, _| pf.osc[i],
                    |_, t| curve.eval(t.powf(1.0 / nf)) / t.powf(inv_p),
                );
                Ok(mk(l, r, "max over t".into()))
            }
            InequalityId::FracThm | InequalityId::FracLorentz => {
                let alpha = params.alpha.unwrap();
                let anchor = anchor_from(params);
                let curve = self.modulus(anchor)?;
                let rhs = besov_from_curve(&curve, alpha, params.q);
                let lhs = self.lorentz(self.profile(), params.pbar(true), params.q)?;
                Ok(mk(lhs, rhs, String::new()))
            }
            InequalityId::FracNueva2 => {
                let alpha = params.alpha.unwrap();
                let p = nf / alpha;
                let curve = self.modulus(NormAnchor::Lp(p))?;
                let rhs = besov_from_curve(&curve, alpha, params.q);
                let lhs = self.lorentz(self.profile(), f64::INFINITY, params.q)?;
                Ok(mk(lhs, rhs, format!("p=n/alpha={p}")))
            }
            InequalityId::Stein2 | InequalityId::Stein3 => {
                let domain = self.domain.ok_or_else(|| {
                    Error::InvalidParams("boundary-value checks need a domain".into())
                })?;
                let pair = steinerberger_check(self.f, domain, &self.t_grid, budget)?;
                Ok(match id {
                    InequalityId::Stein2 => pair.0.with_function_id(&fid),
                    _ => pair.1.with_function_id(&fid),
                })
            }
            InequalityId::IdFrom | InequalityId::IdProduct | InequalityId::IdNumer => {
                let res = rearrange::identity_residuals(self.profile())?;
                let val = match id {
                    InequalityId::IdFrom => res.tail_integral,
                    InequalityId::IdProduct => res.product_rule,
                    _ => res.parts_formula,
                };
                Ok(mk(val, 1.0, "identity residual".into()))
            }
        }
    }
}

fn anchor_from(params: &InequalityParams) -> NormAnchor {
    match params.r {
        Some(r) if r != params.p => NormAnchor::Lorentz(params.p, r),
        _ => NormAnchor::Lp(params.p),
    }
}

/// Human-readable reason a parameter set is outside the admissible region.
pub fn admissible_note(id: InequalityId, params: &InequalityParams) -> String {
    match id {
        InequalityId::Sob1 | InequalityId::Sobk => {
            if params.p == 1.0 && params.q != 1.0 {
                "p=1 requires q=1 for this inequality".into()
            } else {
                format!(
                    "requires 1 <= p <= n/k (= {}) with p > 1 or p = q = 1",
                    params.n as f64 / params.k as f64
                )
            }
        }
        InequalityId::FracLorentz => "requires p > 1 (any r) or p = r = 1".into(),
        InequalityId::Steine => "requires n >= 3".into(),
        InequalityId::Stein2 | InequalityId::Stein3 => "requires n = 2".into(),
        InequalityId::Deacuerdo => "requires k = n".into(),
        _ => "parameters outside the admissible region".into(),
    }
}

impl CheckResult {
    fn with_function_id(mut self, fid: &str) -> Self {
        self.function_id = fid.to_string();
        self
    }
}

/// One-shot check evaluation on a default log grid.
pub fn evaluate_check(
    id: InequalityId,
    f: &SampledFunction,
    function_id: &str,
    params: &InequalityParams,
    budget: f64,
) -> Result<CheckResult> {
    let t = crate::tgrid::log_spaced(1e-4, 1e4, 256)?;
    Evaluator::new(f, function_id, t)?.check(id, params, budget)
}

/// Kernel and norm forms of the planar boundary-value bound. `f` must
/// vanish outside Ω and n must be 2. Returns (kernel check, norm check).
///
/// The Laplacian is trusted only where its whole stencil stays inside Ω
/// (the eroded mask); the self-cell kernel term uses the cell-averaged
/// value of `log(|Ω|/|x-y|^2)` over an equal-area disk, since the kernel is
/// integrable but unbounded at y = x.
pub fn steinerberger_check(
    f: &SampledFunction,
    domain: &Domain,
    t_grid: &[f64],
    budget: f64,
) -> Result<(CheckResult, CheckResult)> {
    use rayon::prelude::*;

    let grid = f.grid();
    if grid.dim != 2 {
        return Err(Error::InvalidParams("boundary-value check is planar (n = 2)".into()));
    }
    // f zero outside the domain
    for (flat, &v) in f.values().iter().enumerate() {
        if v != 0.0 && !domain.mask[flat] {
            return Err(Error::InvalidParams(format!(
                "f must vanish outside the domain (cell {flat})"
            )));
        }
    }
    let lap = calculus::laplacian(f)?;
    let m = grid.points_per_axis;
    let strides = grid.strides();
    // cells whose full stencil lies inside the domain
    let mut eroded = vec![false; grid.cell_count()];
    let mut idx = vec![0usize; 2];
    for flat in 0..grid.cell_count() {
        if !domain.mask[flat] {
            continue;
        }
        grid.decompose(flat, &mut idx);
        if idx.iter().any(|&i| i == 0 || i == m - 1) {
            continue;
        }
        let ok = (0..2).all(|d| {
            domain.mask[flat + strides[d]] && domain.mask[flat - strides[d]]
        });
        eroded[flat] = ok;
    }
    let masked_lap = lap.map_values(|i, v| if eroded[i] { v } else { 0.0 })?;

    let lhs = f
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| domain.mask[*i])
        .fold(0.0f64, |a, (_, &v)| a.max(v.abs()));

    let omega = domain.measure;
    let h = grid.spacing();
    // cell-averaged kernel value on the singular cell
    let k_self = 1.0 + (omega * std::f64::consts::PI / (h * h)).ln();
    let sources: Vec<(usize, f64, f64, f64)> = masked_lap
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, &v)| {
            let c = grid.coords(i);
            (i, c[0], c[1], v.abs() * masked_lap.weights()[i])
        })
        .collect();
    let targets: Vec<usize> = (0..grid.cell_count()).filter(|&i| domain.mask[i]).collect();
    let rhs_kernel = targets
        .par_iter()
        .map(|&xi| {
            let xc = grid.coords(xi);
            let mut acc = 0.0;
            for &(yi, y0, y1, wv) in &sources {
                let k = if yi == xi {
                    k_self
                } else {
                    let d2 = (xc[0] - y0).powi(2) + (xc[1] - y1).powi(2);
                    (omega / d2).ln().max(1.0)
                };
                acc += k * wv;
            }
            acc
        })
        .reduce(|| 0.0, f64::max);

    let lap_profile = rearrange::rearrange(&masked_lap, t_grid)?;
    let rhs_norms = masked_lap.integrate_abs() + functionals::llogl_norm(&lap_profile, omega)?;

    let params = InequalityParams { n: 2, k: 2, ..Default::default() };
    let stein2 = CheckResult::new(
        InequalityId::Stein2,
        "",
        params,
        lhs,
        rhs_kernel,
        budget,
        "max-over-x kernel integral".into(),
    );
    let stein3 = CheckResult::new(
        InequalityId::Stein3,
        "",
        params,
        lhs,
        rhs_norms,
        budget,
        "L1 + L(LogL) of the Laplacian".into(),
    );
    Ok((stein2, stein3))
}

/// Isoperimetric ratio check for a mollified indicator of `shape`.
pub fn iso_check(
    f: &SampledFunction,
    function_id: &str,
    shape: &ShapeSpec,
    budget: f64,
) -> Result<CheckResult> {
    let t = crate::tgrid::log_spaced(1e-4, 1e4, 64)?;
    let ev = Evaluator::new(f, function_id, t)?;
    let params = InequalityParams { n: f.grid().dim, ..Default::default() };
    let ev = ev.with_shape(shape);
    ev.check(InequalityId::Iso, &params, budget)
}
