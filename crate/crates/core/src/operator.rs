//! Truncations of the self-adjoint operator `π(ρ_{σ,∞})` on `ℓ²(ℤ₊)`.
//!
//! In the standard basis the operator is Hermitian tridiagonal with purely
//! imaginary off-diagonal entries. The rescaling `e_n → iⁿ e_n` turns it into
//! the real symmetric Jacobi matrix with diagonal `−q^{2n}(1 − q^{2σ})` and
//! off-diagonal `q^{σ+n} √(1 − q^{2n+2})`, which is the default working form.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::families::{big_q_legendre_recurrence, dual_q_krawtchouk, little_q_jacobi, monic_recurrence_table, DualQKrawtchoukParams};
use crate::identities::{addition_lhs, addition_rhs, big00_weight, h_norm, AdditionParams, NormPath};
use crate::qcore::{q_integral_from_zero, qpochhammer_finite, qpochhammer_infinite_many, qpochhammer_inverse_base, QBase, QParam};
use crate::report::{IdentityId, ParamRecord, Precision, Truncation, VerificationReport};
use crate::scalar::{CompensatedSum, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gauge {
    /// Standard basis, Hermitian with imaginary off-diagonal.
    Complex,
    /// Basis `iⁿ e_n`, real symmetric.
    #[default]
    RealGauged,
}

/// The operator restricted to `span{e_0, …, e_{dim−1}}`.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedRep {
    pub dim: usize,
    pub sigma: f64,
    pub base: QBase<f64>,
    pub gauge: Gauge,
}

impl TruncatedRep {
    pub fn new(dim: usize, sigma: f64, base: QBase<f64>, gauge: Gauge) -> Result<Self> {
        if dim < 2 {
            return Err(Error::TruncationTooSmall { dim, needed: 2 });
        }
        if !sigma.is_finite() {
            return Err(Error::invalid("sigma must be finite"));
        }
        Ok(Self { dim, sigma, base, gauge })
    }

    pub fn q(&self) -> f64 {
        self.base.q()
    }

    fn record(&self) -> ParamRecord {
        ParamRecord::new()
            .with("sigma", self.sigma)
            .with("q", self.q())
            .with("dim", self.dim)
    }
}

/// Real symmetric tridiagonal matrix stored by its bands.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    /// `off[n]` couples `n` and `n + 1`.
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.off[i];
                m[(i + 1, i)] = self.off[i];
            }
        }
        m
    }

    /// `‖(M − λ) v‖` for a vector of length `dim`.
    pub fn residual(&self, v: &[f64], lambda: f64) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            let mut r = (self.diag[i] - lambda) * v[i];
            if i > 0 {
                r += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                r += self.off[i] * v[i + 1];
            }
            s += r * r;
        }
        s.sqrt()
    }

    /// Eigenvalues by the implicit QL method with Wilkinson shifts, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.resize(n, 0.0);
        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > 60 {
                    return Err(Error::EigensolveFailure(format!("QL did not converge for eigenvalue {l}")));
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut deflated = false;
                for i in (l..m).rev() {
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        deflated = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if deflated {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
        d.sort_by(|a, b| a.total_cmp(b));
        Ok(d)
    }
}

/// `π(ρ_{σ,∞})` truncated, in either basis.
#[derive(Debug, Clone)]
pub enum RhoMatrix {
    Real(Tridiagonal),
    Complex(DMatrix<Complex<f64>>),
}

/// Off-diagonal magnitude `q^{σ+n} √(1 − q^{2n+2})`.
fn rho_off(n: usize, rep: &TruncatedRep) -> f64 {
    let q = rep.q();
    q.powf(rep.sigma + n as f64) * (1.0 - q.powi(2 * n as i32 + 2)).sqrt()
}

/// Diagonal `−q^{2n}(1 − q^{2σ})`.
fn rho_diag(n: usize, rep: &TruncatedRep) -> f64 {
    let q = rep.q();
    -q.powi(2 * n as i32) * (1.0 - q.powf(2.0 * rep.sigma))
}

pub fn build_rho_tridiagonal(rep: &TruncatedRep) -> Tridiagonal {
    Tridiagonal {
        diag: (0..rep.dim).map(|n| rho_diag(n, rep)).collect(),
        off: (0..rep.dim - 1).map(|n| rho_off(n, rep)).collect(),
    }
}

pub fn build_rho_complex(rep: &TruncatedRep) -> DMatrix<Complex<f64>> {
    let n = rep.dim;
    let mut m = DMatrix::from_element(n, n, Complex::new(0.0, 0.0));
    for k in 0..n {
        m[(k, k)] = Complex::new(rho_diag(k, rep), 0.0);
        if k + 1 < n {
            let a = rho_off(k, rep);
            // π(ρ)e_k has +i a_k on e_{k+1}; π(ρ)e_{k+1} has −i a_k on e_k
            m[(k + 1, k)] = Complex::new(0.0, a);
            m[(k, k + 1)] = Complex::new(0.0, -a);
        }
    }
    m
}

pub fn build_rho_matrix(rep: &TruncatedRep) -> RhoMatrix {
    match rep.gauge {
        Gauge::RealGauged => RhoMatrix::Real(build_rho_tridiagonal(rep)),
        Gauge::Complex => RhoMatrix::Complex(build_rho_complex(rep)),
    }
}

/// Ascending eigenvalues of the truncated operator.
pub fn eigenvalues(rep: &TruncatedRep) -> Result<Vec<f64>> {
    match build_rho_matrix(rep) {
        RhoMatrix::Real(t) => t.eigenvalues(),
        RhoMatrix::Complex(m) => {
            let eig = SymmetricEigen::try_new(m, f64::EPSILON, 10_000)
                .ok_or_else(|| Error::EigensolveFailure("Hermitian eigensolver did not converge".into()))?;
            let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            v.sort_by(|a, b| a.total_cmp(b));
            Ok(v)
        }
    }
}

/// Spectra of the gauged and the complex matrix coincide.
pub fn gauge_equivalence(rep: &TruncatedRep, tolerance: f64) -> Result<VerificationReport> {
    let real = eigenvalues(&TruncatedRep { gauge: Gauge::RealGauged, ..*rep })?;
    let cplx = eigenvalues(&TruncatedRep { gauge: Gauge::Complex, ..*rep })?;
    let (mut worst, mut at) = (0.0f64, 0);
    for (i, (a, b)) in real.iter().zip(&cplx).enumerate() {
        if (a - b).abs() > worst {
            worst = (a - b).abs();
            at = i;
        }
    }
    Ok(VerificationReport::bound(
        IdentityId::GaugeEquivalence,
        rep.record(),
        real[at],
        cplx[at],
        worst,
        1.0,
        tolerance,
        Truncation::new(Precision::Double).dim(rep.dim),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Branch {
    /// `λ = −q^{2x}`.
    Neg,
    /// `λ = q^{2σ+2x}`.
    Pos,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Neg => "neg",
            Branch::Pos => "pos",
        }
    }
}

/// A point of the discrete spectrum with its squared eigenvector length.
#[derive(Debug, Clone, Copy)]
pub struct SpectralPoint<R> {
    pub lambda: R,
    pub branch: Branch,
    pub x: usize,
    pub h: R,
}

impl<R: Real> SpectralPoint<R> {
    pub fn new(branch: Branch, x: usize, sigma: R, base: &QBase<R>) -> Result<Self> {
        let q2x = base.pow(2 * x as i64);
        let (lambda, s) = match branch {
            Branch::Neg => (-q2x, -sigma),
            Branch::Pos => (base.q().powf(R::from_f64(2.0) * sigma) * q2x, sigma),
        };
        let (h, _) = h_norm(x, s, base, NormPath::Closed)?;
        Ok(Self { lambda, branch, x, h })
    }
}

/// The spectrum `{−q^{2x}} ∪ {q^{2σ+2x}}` sorted by decreasing `|λ|`.
pub fn predicted_spectrum(sigma: f64, base: &QBase<f64>, count: usize) -> Result<Vec<SpectralPoint<f64>>> {
    let mut pts = Vec::with_capacity(2 * count);
    for x in 0..count {
        pts.push(SpectralPoint::new(Branch::Neg, x, sigma, base)?);
        pts.push(SpectralPoint::new(Branch::Pos, x, sigma, base)?);
    }
    pts.sort_by(|a, b| b.lambda.abs().total_cmp(&a.lambda.abs()).then(a.branch.cmp(&b.branch)));
    pts.truncate(count);
    Ok(pts)
}

/// `p̃_n(λ)` in the gauged basis for `n < dim`, from the terminating
/// series with all powers of `q` merged into one exponent so that nothing
/// overflows at large `n`.
///
/// With `Q = q²` and `ε = +1` on the positive branch, `−1` on the negative
/// one,
/// `p̃_n = s_n (Q;Q)_n^{−1/2} Σ_{k ≤ min(n,x)} (−1)^k (Q^{n−k+1};Q)_k (Q^{x−k+1};Q)_k / (Q;Q)_k · q^{((n−2k)² − n)/2 + εσ(2k − n)}`
/// where `s_n = 1` on the positive and `(−1)^n` on the negative branch.
pub fn eigvec<R: Real>(point: &SpectralPoint<R>, sigma: R, base: &QBase<R>, dim: usize) -> Vec<R> {
    let big_q = base.squared();
    let qq = big_q.q();
    let eps = match point.branch {
        Branch::Pos => R::one(),
        Branch::Neg => -R::one(),
    };
    let x = point.x;
    let mut out = Vec::with_capacity(dim);
    let mut qfact = R::one(); // (Q;Q)_n
    for n in 0..dim {
        if n > 0 {
            qfact *= R::one() - big_q.pow(n as i64);
        }
        let mut sum = CompensatedSum::new();
        for k in 0..=n.min(x) {
            let (ni, ki, xi) = (n as i64, k as i64, x as i64);
            let a = qpochhammer_finite(big_q.pow(ni - ki + 1), &big_q, k);
            let b = qpochhammer_finite(big_q.pow(xi - ki + 1), &big_q, k);
            let c = qpochhammer_finite(qq, &big_q, k);
            let e2 = (ni - 2 * ki) * (ni - 2 * ki) - ni; // twice the integer exponent
            let pw = base.q().powf(R::from_f64(e2 as f64 / 2.0) + eps * sigma * R::from_f64((2 * k) as f64 - n as f64));
            sum.add(R::sign_pow(ki) * a * b / c * pw);
        }
        let sign = match point.branch {
            Branch::Pos => R::one(),
            Branch::Neg => R::sign_pow(n as i64),
        };
        out.push(sign * sum.value() / qfact.sqrt());
    }
    out
}

/// `p̃_n` from the leading-coefficient formula with `P̂_n` evaluated by its
/// recurrence: `q^{−σn} q^{−n(n−1)/2} (q²;q²)_n^{−1/2} P̂_n(λ; 0, 0, q^{2σ}, 1; q²)`.
/// Fine for moderate `n`; the prefactor overflows eventually.
pub fn eigvec_by_formula<R: Real>(lambda: R, sigma: R, base: &QBase<R>, dim: usize) -> Vec<R> {
    let big_q = base.squared();
    let c = base.q().powf(R::from_f64(2.0) * sigma);
    let table = monic_recurrence_table(dim - 1, lambda, c, R::one(), &big_q);
    let mut qfact = R::one();
    (0..dim)
        .map(|n| {
            if n > 0 {
                qfact *= R::one() - big_q.pow(n as i64);
            }
            let ni = n as i64;
            let pref = base.q().powf(-sigma * R::from_f64(n as f64)) * base.pow(-ni * (ni - 1) / 2) / qfact.sqrt();
            pref * table[n]
        })
        .collect()
}

/// `p̃_n` by iterating the eigenvalue equation of the gauged matrix,
/// `p̃_{n+1} = ((λ − b_n) p̃_n − a_{n−1} p̃_{n−1}) / a_n`.
pub fn eigvec_by_recurrence(lambda: f64, rep: &TruncatedRep) -> Vec<f64> {
    let t = build_rho_tridiagonal(rep);
    let mut v = vec![0.0; rep.dim];
    v[0] = 1.0;
    for n in 0..rep.dim - 1 {
        let prev = if n > 0 { t.off[n - 1] * v[n - 1] } else { 0.0 };
        v[n + 1] = ((lambda - t.diag[n]) * v[n] - prev) / t.off[n];
    }
    v
}

/// `‖(M − λ)v‖ / ‖v‖` for the analytic eigenvector at `point`.
pub fn eigvec_residual(point: &SpectralPoint<f64>, rep: &TruncatedRep) -> f64 {
    let v = eigvec(point, rep.sigma, &rep.base, rep.dim);
    let t = build_rho_tridiagonal(rep);
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    t.residual(&v, point.lambda) / norm
}

/// Matches the `count` largest-`|λ|` eigenvalues against the predicted
/// spectrum, one report per eigenvalue.
pub fn spectrum_check(rep: &TruncatedRep, count: usize, tolerance: f64) -> Result<Vec<VerificationReport>> {
    if count > rep.dim {
        return Err(Error::invalid(format!("count {count} exceeds dim {}", rep.dim)));
    }
    let mut ev = eigenvalues(rep)?;
    ev.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let predicted = predicted_spectrum(rep.sigma, &rep.base, count + 2)?;
    let mut out = Vec::with_capacity(count);
    for (rank, &lam) in ev.iter().take(count).enumerate() {
        let best = predicted
            .iter()
            .min_by(|a, b| (a.lambda - lam).abs().total_cmp(&(b.lambda - lam).abs()))
            .expect("nonempty prediction");
        let rec = rep
            .record()
            .with("rank", rank)
            .with("branch", best.branch.as_str())
            .with("x", best.x);
        out.push(VerificationReport::bound(
            IdentityId::Spectrum,
            rec,
            lam,
            best.lambda,
            (lam - best.lambda).abs(),
            best.lambda.abs(),
            tolerance,
            Truncation::new(Precision::Double).dim(rep.dim),
        ));
    }
    Ok(out)
}

/// `‖v_λ‖²` over the truncation against `h_x(±σ)`.
pub fn eigvec_norm_check(point: &SpectralPoint<f64>, rep: &TruncatedRep, tolerance: f64) -> VerificationReport {
    let v = eigvec(point, rep.sigma, &rep.base, rep.dim);
    let mut s = CompensatedSum::new();
    for a in &v {
        s.add(a * a);
    }
    let rec = rep.record().with("branch", point.branch.as_str()).with("x", point.x);
    VerificationReport::compare(
        IdentityId::EigvecNorm,
        rec,
        s.value(),
        point.h,
        tolerance,
        Truncation::new(Precision::Double).dim(rep.dim),
    )
}

/// Eigenvector orthogonality and the dual (completeness) relations.
///
/// Reports `⟨v_λ, v_μ⟩ = δ h` for all spectral points with `x ≤ xmax` on
/// both branches, and `Σ_x u_x(n)u_x(m) + Σ_x w_x(n)w_x(m) = δ_{nm}` for
/// `n, m ≤ nmax`, the sums over `x` running until their terms are
/// negligible. Also checks that the two halves of the dual sum equal the
/// Jackson integrals over `[−1, 0]` and `[0, q^{2σ}]` of
/// `P̂_n P̂_m (Qx/q^{2σ}, −Qx; Q)_∞` in base `Q = q²`, suitably normalised.
pub fn norms_and_dual_orthogonality(
    rep: &TruncatedRep,
    xmax: usize,
    nmax: usize,
    tolerance: f64,
) -> Result<Vec<VerificationReport>> {
    if nmax >= rep.dim {
        return Err(Error::TruncationTooSmall { dim: rep.dim, needed: nmax + 1 });
    }
    let base = &rep.base;
    let sigma = rep.sigma;
    let trunc = Truncation::new(Precision::Double).dim(rep.dim);
    let mut out = Vec::new();

    // eigenvector orthogonality
    let mut pts = Vec::new();
    for x in 0..=xmax {
        for br in [Branch::Neg, Branch::Pos] {
            let p = SpectralPoint::new(br, x, sigma, base)?;
            let v = eigvec(&p, sigma, base, rep.dim);
            pts.push((p, v));
        }
    }
    for (i, (pi, vi)) in pts.iter().enumerate() {
        for (pj, vj) in pts.iter().skip(i) {
            let mut s = CompensatedSum::new();
            for (a, b) in vi.iter().zip(vj) {
                s.add(a * b);
            }
            let rec = rep
                .record()
                .with("branch_a", pi.branch.as_str())
                .with("x_a", pi.x)
                .with("branch_b", pj.branch.as_str())
                .with("x_b", pj.x);
            let same = pi.branch == pj.branch && pi.x == pj.x;
            out.push(if same {
                VerificationReport::compare(IdentityId::EigvecNorm, rec, s.value(), pi.h, tolerance, trunc.clone())
            } else {
                let scale = (pi.h * pj.h).sqrt();
                VerificationReport::compare_scaled(IdentityId::EigvecNorm, rec, s.value(), 0.0, scale, tolerance, trunc.clone())
            });
        }
    }

    // dual relations: accumulate until the normalised terms are negligible
    let mut halves = vec![[0.0f64; 2]; (nmax + 1) * (nmax + 1)];
    let mut sums: Vec<[CompensatedSum<f64>; 2]> =
        (0..(nmax + 1) * (nmax + 1)).map(|_| [CompensatedSum::new(), CompensatedSum::new()]).collect();
    let mut xs = 0;
    for (bi, br) in [Branch::Neg, Branch::Pos].into_iter().enumerate() {
        let mut quiet = 0;
        let mut x = 0;
        while quiet < 5 {
            if x >= base.max_terms() {
                return Err(Error::NonConvergence { what: "dual orthogonality sum".into(), terms: x });
            }
            let p = SpectralPoint::new(br, x, sigma, base)?;
            let v = eigvec(&p, sigma, base, nmax + 1);
            let mut loud = false;
            for n in 0..=nmax {
                for m in 0..=nmax {
                    let t = v[n] * v[m] / p.h;
                    if t.abs() > 1e-3 * f64::EPSILON {
                        loud = true;
                    }
                    sums[n * (nmax + 1) + m][bi].add(t);
                }
            }
            quiet = if loud { 0 } else { quiet + 1 };
            x += 1;
        }
        xs = xs.max(x);
    }
    for (h, s) in halves.iter_mut().zip(&sums) {
        *h = [s[0].value(), s[1].value()];
    }
    let dual_trunc = trunc.clone().series_terms(xs);
    for n in 0..=nmax {
        for m in 0..=nmax {
            let [neg, pos] = halves[n * (nmax + 1) + m];
            let rec = rep.record().with("n", n).with("m", m);
            let rhs = if n == m { 1.0 } else { 0.0 };
            out.push(VerificationReport::compare_scaled(
                IdentityId::DualOrthogonality,
                rec,
                neg + pos,
                rhs,
                1.0,
                tolerance,
                dual_trunc.clone(),
            ));
        }
    }

    // the halves as Jackson integrals in base q²
    let big_q = base.squared();
    let c = base.q().powf(2.0 * sigma);
    let kappa = |n: usize| -> f64 {
        let ni = n as i64;
        base.q().powf(-sigma * n as f64) * base.pow(-ni * (ni - 1) / 2) / qpochhammer_finite(big_q.q(), &big_q, n).sqrt()
    };
    let qq = big_q.q();
    let kconst = (1.0 - qq) * c * qpochhammer_infinite_many(&[qq, -1.0 / c, -qq * c], &big_q)?;
    let tail = 1e-3 * f64::EPSILON;
    for n in 0..=nmax.min(4) {
        for m in n..=nmax.min(4) {
            let mut f = |x: f64| -> f64 {
                let t = monic_recurrence_table(n.max(m), x, c, 1.0, &big_q);
                t[n] * t[m] * big00_weight(x, c, 1.0, &big_q).unwrap_or(f64::NAN)
            };
            let (upper, tu) = q_integral_from_zero(&mut f, c, &big_q, tail, 5)?;
            let (lower, tl) = q_integral_from_zero(&mut f, -1.0, &big_q, tail, 5)?;
            let scale = kappa(n) * kappa(m) / kconst;
            let [neg, pos] = halves[n * (nmax + 1) + m];
            for (label, sum, integral) in [("lower", neg, -lower * scale), ("upper", pos, upper * scale)] {
                let rec = rep.record().with("n", n).with("m", m).with("half", label);
                out.push(VerificationReport::compare_scaled(
                    IdentityId::DualOrthogonalityQIntegral,
                    rec,
                    sum,
                    integral,
                    1.0,
                    tolerance,
                    trunc.clone().integral_terms(tu + tl).series_terms(xs),
                ));
            }
        }
    }
    Ok(out)
}

/// `d^l_m = q^{−m(l−m)} / (q²;q²)_m · √((q²;q²)_{l+m} / (q²;q²)_{l−m})`.
pub fn d_coefficient(l: usize, m: usize, base: &QBase<f64>) -> f64 {
    let big_q = base.squared();
    let qq = big_q.q();
    let (li, mi) = (l as i64, m as i64);
    base.pow(-mi * (li - mi)) / qpochhammer_finite(qq, &big_q, m)
        * (qpochhammer_finite(qq, &big_q, l + m) / qpochhammer_finite(qq, &big_q, l - m)).sqrt()
}

/// The single nonzero component of `π(t^l_{0,m}) e_p` in the standard
/// basis: `Some((target, amplitude))`, or `None` when the target index is
/// negative.
pub fn matrix_element_action(l: usize, m: i64, p: usize, base: &QBase<f64>) -> Result<Option<(usize, f64)>> {
    let k = m.unsigned_abs() as usize;
    if k > l {
        return Err(Error::invalid(format!("|m| = {k} exceeds l = {l}")));
    }
    let big_q = base.squared();
    let qk = QParam::q_power(k as i64);
    let dl = d_coefficient(l, k, base);
    let (pi, ki) = (p as i64, k as i64);
    if m >= 0 {
        let amp = dl
            * f64::sign_pow(ki)
            * base.pow(ki * (pi + 1))
            * qpochhammer_finite(base.pow(2 * pi + 2), &big_q, k).sqrt()
            * little_q_jacobi(l - k, big_q.pow(pi), qk, qk, &big_q)?;
        Ok(Some((p + k, amp)))
    } else {
        if p < k {
            return Ok(None);
        }
        let amp = dl
            * base.pow(ki * (pi - ki))
            * qpochhammer_inverse_base(&QParam::q_power(pi), &big_q, k).sqrt()
            * little_q_jacobi(l - k, big_q.pow(pi - ki), qk, qk, &big_q)?;
        Ok(Some((p - k, amp)))
    }
}

/// Real part `ĉ_m` of `c^{l,σ}_m = i^{|m|} ĉ_m`,
/// `ĉ_m = q^{−(l+σ)m + m²/2} / √((q²;q²)_{l+m}(q²;q²)_{l−m}) · R_{l−m}(q^{−2l} − q^{−2l−2σ}; q^{2σ}, 2l; q²)`.
pub fn c_coefficient(l: usize, m: i64, sigma: f64, base: &QBase<f64>) -> Result<f64> {
    let k = m.unsigned_abs() as usize;
    let big_q = base.squared();
    let qq = big_q.q();
    let kf = k as f64;
    let pref = base.q().powf(-(l as f64 + sigma) * kf + 0.5 * kf * kf)
        / (qpochhammer_finite(qq, &big_q, l + k) * qpochhammer_finite(qq, &big_q, l - k)).sqrt();
    let params = DualQKrawtchoukParams::new(base.q().powf(2.0 * sigma), 2 * l, big_q)?;
    Ok(pref * dual_q_krawtchouk(l - k, l, &params)?)
}

/// `C_l(σ) = (−1)^l q^{−l²−l} (−q^{2−2σ}; q²)_l / (q^{2l+2}; q²)_l`.
pub fn big_c<R: Real>(l: usize, sigma: R, base: &QBase<R>) -> R {
    let big_q = base.squared();
    let li = l as i64;
    let q = base.q();
    R::sign_pow(li) * base.pow(-li * li - li) * qpochhammer_finite(-(q.powf(R::from_f64(2.0) - R::from_f64(2.0) * sigma)), &big_q, l)
        / qpochhammer_finite(base.pow(2 * li + 2), &big_q, l)
}

/// `Σ_k A_k ∏_{j<k} (I − Q^{j+1} M / c)` with the big q-Legendre
/// coefficients `A_k` in base `Q = q²`, `c = q^{2σ}`, `d = 1`.
fn legendre_matrix_polynomial<T>(l: usize, sigma: f64, base: &QBase<f64>, m: &DMatrix<T>) -> DMatrix<T>
where
    T: nalgebra::ComplexField<RealField = f64> + Copy,
{
    let n = m.nrows();
    let big_q = base.squared();
    let qq = big_q.q();
    let c = base.q().powf(2.0 * sigma);
    let li = l as i64;
    let eye = DMatrix::<T>::identity(n, n);
    let mut acc = DMatrix::<T>::zeros(n, n);
    let mut prod = eye.clone();
    for k in 0..=l {
        let a_k = qpochhammer_finite(big_q.pow(-li), &big_q, k) * qpochhammer_finite(big_q.pow(li + 1), &big_q, k)
            / (qpochhammer_finite(qq, &big_q, k).powi(2) * qpochhammer_finite(-qq / c, &big_q, k))
            * big_q.pow(k as i64);
        acc += &prod * T::from_real(a_k);
        let factor = &eye - m * T::from_real(big_q.pow(k as i64 + 1) / c);
        prod = &prod * factor;
    }
    acc
}

/// Left side `Σ_m q^{−m/2} c_m π(t^l_{0,m})` in the gauged basis.
fn zonal_lhs_gauged(l: usize, rep: &TruncatedRep) -> Result<DMatrix<f64>> {
    let n = rep.dim;
    let mut out = DMatrix::zeros(n, n);
    let q = rep.q();
    for m in -(l as i64)..=(l as i64) {
        let c_hat = c_coefficient(l, m, rep.sigma, &rep.base)?;
        // i^{|m|} from c_m and i^{p − target} from the gauge combine to 1 or (−1)^{|m|}
        let phase = if m >= 0 { 1.0 } else { f64::sign_pow(-m) };
        let coef = q.powf(-(m as f64) / 2.0) * c_hat * phase;
        for p in 0..n {
            if let Some((t, amp)) = matrix_element_action(l, m, p, &rep.base)? {
                if t < n {
                    out[(t, p)] += coef * amp;
                }
            }
        }
    }
    Ok(out)
}

/// Left side in the standard basis.
fn zonal_lhs_complex(l: usize, rep: &TruncatedRep) -> Result<DMatrix<Complex<f64>>> {
    let n = rep.dim;
    let mut out = DMatrix::from_element(n, n, Complex::new(0.0, 0.0));
    let q = rep.q();
    let i = Complex::new(0.0, 1.0);
    for m in -(l as i64)..=(l as i64) {
        let c_m = i.powu(m.unsigned_abs() as u32) * c_coefficient(l, m, rep.sigma, &rep.base)?;
        let coef = c_m * q.powf(-(m as f64) / 2.0);
        for p in 0..n {
            if let Some((t, amp)) = matrix_element_action(l, m, p, &rep.base)? {
                if t < n {
                    out[(t, p)] += coef * amp;
                }
            }
        }
    }
    Ok(out)
}

fn operator_record(l: usize, rep: &TruncatedRep, mode: &str) -> ParamRecord {
    rep.record().with("l", l).with("mode", mode)
}

/// The zonal element expanded in matrix elements equals `C_l(σ)` times the
/// big q-Legendre polynomial of the operator, compared on the leading
/// `(dim − l) × (dim − l)` block.
///
/// In complex mode a second report checks that the difference, moved to
/// the gauged basis, is real to within `imag_tolerance`.
pub fn operator_identity(
    l: usize,
    rep: &TruncatedRep,
    tolerance: f64,
    imag_tolerance: f64,
) -> Result<Vec<VerificationReport>> {
    if rep.dim < l + 2 {
        return Err(Error::TruncationTooSmall { dim: rep.dim, needed: l + 2 });
    }
    let keep = rep.dim - l;
    let cl = big_c(l, rep.sigma, &rep.base);
    let trunc = Truncation::new(Precision::Double).dim(rep.dim).series_terms(l + 1);
    match rep.gauge {
        Gauge::RealGauged => {
            let lhs = zonal_lhs_gauged(l, rep)?;
            let rhs = legendre_matrix_polynomial(l, rep.sigma, &rep.base, &build_rho_tridiagonal(rep).to_dense()) * cl;
            let (mut worst, mut at) = (0.0f64, (0, 0));
            for i in 0..keep {
                for j in 0..keep {
                    let dev = (lhs[(i, j)] - rhs[(i, j)]).abs();
                    if dev > worst {
                        worst = dev;
                        at = (i, j);
                    }
                }
            }
            let scale = rhs.view((0, 0), (keep, keep)).amax();
            Ok(vec![VerificationReport::bound(
                IdentityId::OperatorIdentity,
                operator_record(l, rep, "real_gauged"),
                lhs[at],
                rhs[at],
                worst,
                scale,
                tolerance,
                trunc,
            )])
        }
        Gauge::Complex => {
            let lhs = zonal_lhs_complex(l, rep)?;
            let rhs = legendre_matrix_polynomial(l, rep.sigma, &rep.base, &build_rho_complex(rep)) * Complex::new(cl, 0.0);
            let (mut worst, mut at) = (0.0f64, (0, 0));
            let mut imag = 0.0f64;
            let i = Complex::new(0.0, 1.0);
            for r in 0..keep {
                for c in 0..keep {
                    let dev = (lhs[(r, c)] - rhs[(r, c)]).norm();
                    if dev > worst {
                        worst = dev;
                        at = (r, c);
                    }
                    // entry (r, c) in the basis iⁿ e_n picks up i^{c − r}
                    let phase = i.powi(c as i32 - r as i32);
                    imag = imag.max((lhs[(r, c)] * phase).im.abs()).max((rhs[(r, c)] * phase).im.abs());
                }
            }
            let scale = rhs.view((0, 0), (keep, keep)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            Ok(vec![
                VerificationReport::bound(
                    IdentityId::OperatorIdentity,
                    operator_record(l, rep, "complex"),
                    lhs[at].norm(),
                    rhs[at].norm(),
                    worst,
                    scale,
                    tolerance,
                    trunc.clone(),
                ),
                VerificationReport::bound(
                    IdentityId::OperatorIdentityImaginary,
                    operator_record(l, rep, "complex"),
                    imag,
                    0.0,
                    imag,
                    scale,
                    imag_tolerance,
                    trunc,
                ),
            ])
        }
    }
}

/// Both sides of the scalar identity obtained by pairing the operator
/// identity with `e_p` and an eigenvector, after dividing out the
/// normalisation of `⟨e_p, v_λ⟩`. Being polynomial in `λ`, it holds for
/// every `λ`.
pub fn scalar_identity_sides<R: Real>(l: usize, p: usize, sigma: R, lambda: R, base: &QBase<R>) -> Result<(R, R)> {
    let big_q = base.squared();
    let qq = big_q.q();
    let two = R::from_f64(2.0);
    let c = base.q().powf(two * sigma);
    let (li, pi) = (l as i64, p as i64);
    let table = monic_recurrence_table(p + l, lambda, c, R::one(), &big_q);
    let legendre = big_q_legendre_recurrence(l, lambda, c, R::one(), &big_q)?;
    let lhs = big_c(l, sigma, base) * legendre * table[p];

    let kraw = DualQKrawtchoukParams::new(c, 2 * l, big_q)?;
    let mut rhs = CompensatedSum::new();
    let r0 = dual_q_krawtchouk(l, l, &kraw)?;
    rhs.add(r0 * little_q_jacobi(l, big_q.pow(pi), R::one(), R::one(), &big_q)? * table[p] / qpochhammer_finite(qq, &big_q, l));
    for m in 1..=l {
        let mi = m as i64;
        let rm = dual_q_krawtchouk(l - m, l, &kraw)?;
        let qm = QParam::q_power(mi);
        let den = qpochhammer_finite(qq, &big_q, l - m) * qpochhammer_finite(qq, &big_q, m);
        if m <= p {
            let coef = R::sign_pow(mi) * base.pow(2 * mi * (pi - li)) * qpochhammer_inverse_base(&QParam::q_power(pi), &big_q, m) / den;
            rhs.add(coef * rm * little_q_jacobi(l - m, big_q.pow(pi - mi), qm, qm, &big_q)? * table[p - m]);
        }
        // q^{m(m+1) − 2m(σ+l)}
        let coef = R::sign_pow(mi) * base.pow(mi * (mi + 1) - 2 * mi * li) * c.powi(-(m as i32)) / den;
        rhs.add(coef * rm * little_q_jacobi(l - m, big_q.pow(pi), qm, qm, &big_q)? * table[p + m]);
    }
    Ok((lhs, rhs.value()))
}

pub fn scalar_identity_412<R: Real>(
    l: usize,
    p: usize,
    sigma: R,
    lambda: R,
    base: &QBase<R>,
    tolerance: f64,
) -> Result<VerificationReport> {
    let (lhs, rhs) = scalar_identity_sides(l, p, sigma, lambda, base)?;
    let rec = ParamRecord::new()
        .with("l", l)
        .with("p", p)
        .with("sigma", sigma.to_f64())
        .with("lambda", lambda.to_f64())
        .with("q", base.q().to_f64());
    Ok(VerificationReport::compare(
        IdentityId::ScalarIdentity,
        rec,
        lhs,
        rhs,
        tolerance,
        Truncation::for_real::<R>().series_terms(l + 1),
    ))
}

/// Maps the addition formula at `(l, p, x, c, d, q)` onto the scalar
/// identity at base `√q`, `q^{2σ} = c/d` and `λ = x/d`, and checks that
/// both sides agree up to the common factor `d^p` and that the two
/// residuals match. The deviation is relative to the larger side.
pub fn addition_linkage<R: Real>(a: &AdditionParams<R>, tolerance: f64) -> Result<VerificationReport> {
    let lhs13 = addition_lhs(a)?;
    let rhs13 = addition_rhs(a)?.total();
    let root = QBase::from_real(a.base.q().sqrt())?;
    let sigma = (a.c / a.d).ln() / (R::from_f64(2.0) * root.q().ln());
    let lambda = a.x / a.d;
    let (lhs12, rhs12) = scalar_identity_sides(a.l, a.p, sigma, lambda, &root)?;
    let dp = a.d.powi(a.p as i32);
    let (l12, r12) = (lhs12 * dp, rhs12 * dp);
    let scale = lhs13.abs().max(rhs13.abs()).max(R::from_f64(f64::MIN_POSITIVE));
    let dev = (lhs13 - l12).abs().max((rhs13 - r12).abs());
    let res_gap = ((lhs13 - rhs13).abs() - (l12 - r12).abs()).abs();
    let dev = dev.max(res_gap) / scale;
    let rec = a.record().with("sigma", sigma.to_f64());
    Ok(VerificationReport::from_residuals(
        IdentityId::AdditionLinkage,
        rec,
        lhs13.to_f64(),
        l12.to_f64(),
        (dev * scale).to_f64(),
        dev.to_f64(),
        tolerance,
        Truncation::for_real::<R>().series_terms(a.l + 1),
    ))
}
