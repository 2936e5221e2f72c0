//! Verification reports shared by every identity checker.

use std::cmp::Ordering;
use std::fmt;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::scalar::Real;

/// Smallest denominator used when forming relative residuals.
pub const DEFAULT_SCALE: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityId {
    Orthogonality,
    CharlierSame,
    CharlierCross,
    HNorm,
    Addition,
    AdditionPolynomiality,
    SpecialCaseLittle,
    ProductFormula,
    ProductFormulaDescending,
    MonicPaths,
    GaugeEquivalence,
    Spectrum,
    EigvecResidual,
    EigvecNorm,
    DualOrthogonality,
    DualOrthogonalityQIntegral,
    OperatorIdentity,
    OperatorIdentityImaginary,
    ScalarIdentity,
    AdditionLinkage,
    LimitBigQJacobi,
    LimitLittleQJacobi,
    LimitDualKrawtchouk,
    RatioAsymptotic,
    KernelLimit,
    ClassicalAddition,
    ClassicalAdditionParametrized,
    ClassicalProduct,
}

impl IdentityId {
    pub fn as_str(&self) -> &'static str {
        use IdentityId::*;
        match self {
            Orthogonality => "orthogonality",
            CharlierSame => "charlier_same",
            CharlierCross => "charlier_cross",
            HNorm => "h_norm",
            Addition => "addition",
            AdditionPolynomiality => "addition_polynomiality",
            SpecialCaseLittle => "special_case_little",
            ProductFormula => "product_formula",
            ProductFormulaDescending => "product_formula_descending",
            MonicPaths => "monic_paths",
            GaugeEquivalence => "gauge_equivalence",
            Spectrum => "spectrum",
            EigvecResidual => "eigvec_residual",
            EigvecNorm => "eigvec_norm",
            DualOrthogonality => "dual_orthogonality",
            DualOrthogonalityQIntegral => "dual_orthogonality_q_integral",
            OperatorIdentity => "operator_identity",
            OperatorIdentityImaginary => "operator_identity_imaginary",
            ScalarIdentity => "scalar_identity",
            AdditionLinkage => "addition_linkage",
            LimitBigQJacobi => "limit_big_q_jacobi",
            LimitLittleQJacobi => "limit_little_q_jacobi",
            LimitDualKrawtchouk => "limit_dual_q_krawtchouk",
            RatioAsymptotic => "ratio_asymptotic",
            KernelLimit => "kernel_limit",
            ClassicalAddition => "classical_addition",
            ClassicalAdditionParametrized => "classical_addition_parametrized",
            ClassicalProduct => "classical_product",
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Text(String),
}

impl ParamValue {
    fn cmp_total(&self, other: &Self) -> Ordering {
        use ParamValue::*;
        match (self, other) {
            (Int(a), Int(b)) => a.cmp(b),
            (Real(a), Real(b)) => a.total_cmp(b),
            (Int(a), Real(b)) => (*a as f64).total_cmp(b),
            (Real(a), Int(b)) => a.total_cmp(&(*b as f64)),
            (Text(a), Text(b)) => a.cmp(b),
            (Text(_), _) => Ordering::Greater,
            (_, Text(_)) => Ordering::Less,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Real(v) => write!(f, "{v}"),
            ParamValue::Text(v) => f.write_str(v),
        }
    }
}

impl From<i64> for ParamValue {
    fn from(v: i64) -> Self {
        ParamValue::Int(v)
    }
}

impl From<usize> for ParamValue {
    fn from(v: usize) -> Self {
        ParamValue::Int(v as i64)
    }
}

impl From<i32> for ParamValue {
    fn from(v: i32) -> Self {
        ParamValue::Int(v as i64)
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Real(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

impl From<String> for ParamValue {
    fn from(v: String) -> Self {
        ParamValue::Text(v)
    }
}

/// Named parameters of a single check, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamRecord {
    entries: Vec<(String, ParamValue)>,
}

impl ParamRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: impl Into<ParamValue>) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: impl Into<ParamValue>) {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| k == name) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((name.to_string(), value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.entries.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ParamValue)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Serialize for ParamRecord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (k, v) in &self.entries {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Eq for ParamRecord {}

impl PartialOrd for ParamRecord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ParamRecord {
    fn cmp(&self, other: &Self) -> Ordering {
        for ((ka, va), (kb, vb)) in self.entries.iter().zip(&other.entries) {
            let ord = ka.cmp(kb).then_with(|| va.cmp_total(vb));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.entries.len().cmp(&other.entries.len())
    }
}

impl fmt::Display for ParamRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    Extended,
}

impl Precision {
    /// Alternating sums of degree above four default to extended precision.
    pub fn auto_for_degree(l: usize) -> Self {
        if l > 4 {
            Precision::Extended
        } else {
            Precision::Double
        }
    }

    pub fn of<R: Real>() -> Self {
        if R::EPSILON < f64::EPSILON {
            Precision::Extended
        } else {
            Precision::Double
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Precision::Double => "double",
            Precision::Extended => "extended",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "double" | "f64" => Ok(Precision::Double),
            "extended" | "dd" | "double-double" => Ok(Precision::Extended),
            other => Err(format!("unknown precision '{other}'")),
        }
    }
}

/// How a report's numbers were obtained.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Truncation {
    pub precision: Precision,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_terms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral_terms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
    /// For convergence scans: whether the error decreased strictly.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monotone: Option<bool>,
}

impl Truncation {
    pub fn new(precision: Precision) -> Self {
        Self {
            precision,
            ..Self::default()
        }
    }

    pub fn for_real<R: Real>() -> Self {
        Self::new(Precision::of::<R>())
    }

    pub fn series_terms(mut self, n: usize) -> Self {
        self.series_terms = Some(n);
        self
    }

    pub fn integral_terms(mut self, n: usize) -> Self {
        self.integral_terms = Some(n);
        self
    }

    pub fn dim(mut self, n: usize) -> Self {
        self.dim = Some(n);
        self
    }

    pub fn tail_bound(mut self, b: f64) -> Self {
        self.tail_bound = Some(b);
        self
    }

    pub fn monotone(mut self, m: bool) -> Self {
        self.monotone = Some(m);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub identity_id: IdentityId,
    pub params: ParamRecord,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub truncation: Truncation,
}

impl VerificationReport {
    /// Compares `lhs` and `rhs`; residuals are formed in `R` before rounding.
    pub fn compare<R: Real>(
        identity_id: IdentityId,
        params: ParamRecord,
        lhs: R,
        rhs: R,
        tolerance: f64,
        truncation: Truncation,
    ) -> Self {
        Self::compare_scaled(identity_id, params, lhs, rhs, DEFAULT_SCALE, tolerance, truncation)
    }

    /// Like [`compare`](Self::compare) with an explicit floor for the relative
    /// denominator, for identities whose two sides vanish.
    pub fn compare_scaled<R: Real>(
        identity_id: IdentityId,
        params: ParamRecord,
        lhs: R,
        rhs: R,
        scale: f64,
        tolerance: f64,
        truncation: Truncation,
    ) -> Self {
        let abs = (lhs - rhs).abs().to_f64();
        let denom = lhs.abs().to_f64().max(rhs.abs().to_f64()).max(scale);
        let rel = abs / denom;
        Self::from_residuals(identity_id, params, lhs.to_f64(), rhs.to_f64(), abs, rel, tolerance, truncation)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn from_residuals(
        identity_id: IdentityId,
        params: ParamRecord,
        lhs: f64,
        rhs: f64,
        abs_residual: f64,
        rel_residual: f64,
        tolerance: f64,
        truncation: Truncation,
    ) -> Self {
        let tiny = lhs.abs() < tolerance && rhs.abs() < tolerance;
        let passed = rel_residual <= tolerance || (tiny && abs_residual <= tolerance);
        let passed = passed && truncation.monotone.unwrap_or(true);
        Self {
            identity_id,
            params,
            lhs,
            rhs,
            abs_residual,
            rel_residual,
            tolerance,
            passed,
            truncation,
        }
    }

    /// Report for a quantity that must lie below `tolerance` in absolute
    /// value, such as a matrix-entry deviation; `lhs` and `rhs` are the
    /// compared values at the worst entry.
    pub fn bound(
        identity_id: IdentityId,
        params: ParamRecord,
        lhs: f64,
        rhs: f64,
        deviation: f64,
        scale: f64,
        tolerance: f64,
        truncation: Truncation,
    ) -> Self {
        let rel = deviation / scale.max(DEFAULT_SCALE);
        let passed = deviation <= tolerance && truncation.monotone.unwrap_or(true);
        Self {
            identity_id,
            params,
            lhs,
            rhs,
            abs_residual: deviation,
            rel_residual: rel,
            tolerance,
            passed,
            truncation,
        }
    }

    pub fn sort_key(&self) -> (IdentityId, &ParamRecord) {
        (self.identity_id, &self.params)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<4} [{}] lhs={:.15e} rhs={:.15e} abs={:.3e} rel={:.3e} tol={:.1e} ({})",
            self.identity_id,
            if self.passed { "ok" } else { "FAIL" },
            self.params,
            self.lhs,
            self.rhs,
            self.abs_residual,
            self.rel_residual,
            self.tolerance,
            self.truncation.precision,
        )
    }
}

/// Sorts reports by identity and parameter record.
pub fn sort_reports(reports: &mut [VerificationReport]) {
    reports.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

pub fn all_passed(reports: &[VerificationReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::DoubleDouble;

    fn rec() -> ParamRecord {
        ParamRecord::new().with("l", 2usize).with("q", 0.5)
    }

    #[test]
    fn relative_policy() {
        let r = VerificationReport::compare(IdentityId::Addition, rec(), 1.0, 1.0 + 1e-10, 1e-8, Truncation::default());
        assert!(r.passed);
        assert!((r.rel_residual - 1e-10).abs() < 1e-15);
        let r = VerificationReport::compare(IdentityId::Addition, rec(), 1.0, 1.1, 1e-8, Truncation::default());
        assert!(!r.passed);
    }

    #[test]
    fn absolute_fallback_for_tiny_sides() {
        let r = VerificationReport::compare(IdentityId::CharlierCross, rec(), 3e-12, -2e-12, 1e-10, Truncation::default());
        assert!(r.rel_residual > 1e-10);
        assert!(r.passed);
    }

    #[test]
    fn residual_formed_before_rounding() {
        let a = DoubleDouble::from_parts(1.0, 1e-25);
        let b = DoubleDouble::from_parts(1.0, 0.0);
        let r = VerificationReport::compare(IdentityId::Addition, rec(), a, b, 1e-20, Truncation::for_real::<DoubleDouble>());
        assert!(r.abs_residual > 0.0 && r.abs_residual < 2e-25);
        assert_eq!(r.truncation.precision, Precision::Extended);
    }

    #[test]
    fn non_monotone_scan_fails() {
        let r = VerificationReport::compare(
            IdentityId::KernelLimit,
            rec(),
            0.0,
            0.0,
            0.05,
            Truncation::default().monotone(false),
        );
        assert!(!r.passed);
    }

    #[test]
    fn json_shape() {
        let r = VerificationReport::compare(IdentityId::Addition, rec(), 1.0, 1.0, 1e-8, Truncation::default().series_terms(3));
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["identity_id"], "addition");
        assert_eq!(v["params"]["l"], 2);
        assert_eq!(v["truncation"]["precision"], "double");
        assert_eq!(v["truncation"]["series_terms"], 3);
        assert!(v["truncation"].get("dim").is_none());
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        for k in ["identity_id", "params", "lhs", "rhs", "abs_residual", "rel_residual", "tolerance", "passed", "truncation"] {
            assert!(keys.contains(&k.to_string()));
        }
    }

    #[test]
    fn params_sort_numerically() {
        let mut v = [
            ParamRecord::new().with("l", 10usize),
            ParamRecord::new().with("l", 2usize),
            ParamRecord::new().with("l", 2usize).with("x", -0.5),
        ];
        v.sort();
        assert_eq!(v[0].get("l"), Some(&ParamValue::Int(2)));
        assert_eq!(v[0].len(), 1);
        assert_eq!(v[2].get("l"), Some(&ParamValue::Int(10)));
    }

    #[test]
    fn precision_parse_and_auto() {
        assert_eq!("extended".parse::<Precision>().unwrap(), Precision::Extended);
        assert!("quad".parse::<Precision>().is_err());
        assert_eq!(Precision::auto_for_degree(4), Precision::Double);
        assert_eq!(Precision::auto_for_degree(5), Precision::Extended);
    }
}
