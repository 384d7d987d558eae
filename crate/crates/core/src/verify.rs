//! The identity battery: every operator identity and construction checked at
//! two resolutions (`N` and `2N - 1`) against absolute caps and the O(h^2)
//! convergence ratio.

use num_complex::Complex;
use serde::Serialize;

use crate::conjugate::{conjugate_from_w1, fit_gauge};
use crate::corpus::{corpus, scale, Member};
use crate::diff::{d_z, d_zbar, laplacian};
use crate::error::{Error, Result};
use crate::expansion::{fit_formal_polynomial, round_trip_bound, series_residual, taylor_coefficients, BasisKind, FitResult};
use crate::field::{ComplexField, ScalarField, VectorField2};
use crate::formal_powers::{build_formal_powers, fg_integral, AuxSystem, FormalPowerTable, Unit};
use crate::goursat::GoursatOptions;
use crate::quadrature::{contour_integral_l, PathOrder};
use crate::scalar::Real;
use crate::superpotential::Superpotential;
use crate::susy::{project_p, DarbouxKind, Intertwining, SusyOps, VekuaKind};
use crate::transmutation::{Transmutations, Variant};

pub const MARGIN: usize = 2;

/// Reference tags of the battery, in report order.
pub const FAMILIES: [&str; 16] = [
    "analytic-limit",
    "vekua",
    "zero-modes",
    "ground-states",
    "darboux",
    "factorization",
    "darboux-products",
    "intertwining",
    "nilpotency",
    "transmutation",
    "transmuted-powers",
    "commuting-diagram",
    "integral-diagram",
    "laplacian-corollary",
    "conjugate",
    "expansion",
];

const NEEDS_TRANSMUTATION: [&str; 5] = [
    "transmutation",
    "transmuted-powers",
    "commuting-diagram",
    "integral-diagram",
    "laplacian-corollary",
];
const N_POWERS: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions<T> {
    /// Constant added to `U0` (harness sanity).
    pub corrupt_u0: Option<T>,
    pub goursat: GoursatOptions<T>,
    pub ratio_band: (f64, f64),
    /// Residuals at or below this (relative) value count as exact.
    pub exact_floor: f64,
    /// Restrict the battery to these families; empty runs everything.
    pub families: Vec<String>,
}

impl<T: Real> Default for VerifyOptions<T> {
    fn default() -> Self {
        Self {
            corrupt_u0: None,
            goursat: GoursatOptions::default(),
            ratio_band: (3.5, 4.5),
            exact_floor: 1e-8,
            families: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cap {
    /// `c * h^2`
    H2(f64),
    Abs(f64),
}

impl Cap {
    fn value(self, h: f64) -> f64 {
        match self {
            Cap::H2(c) => c * h * h,
            Cap::Abs(c) => c,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportRow {
    pub identity: String,
    pub reference: String,
    pub grid: String,
    pub residual: f64,
    pub residual_fine: f64,
    pub cap: f64,
    pub ratio: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub superpotential: String,
    pub params: Vec<f64>,
    pub grid: String,
    pub grid_fine: String,
    pub corrupted_u0: Option<f64>,
    pub passed: bool,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Fail)
    }
}

struct Measurement {
    identity: String,
    reference: &'static str,
    cap: Cap,
    ratio: bool,
    residual: f64,
}

struct Level<T: Real> {
    sp: Superpotential<T>,
    table: FormalPowerTable<T>,
    aux: AuxSystem<T>,
    corpus: Vec<Member<T>>,
    tr: Option<Transmutations<T>>,
    families: Vec<String>,
    fine: bool,
    offset: Option<T>,
    out: Vec<Measurement>,
}

impl<T: Real> Level<T> {
    fn new(sp: Superpotential<T>, fine: bool, opts: &VerifyOptions<T>) -> Result<Self> {
        let table = build_formal_powers(&sp, N_POWERS)?;
        let aux = AuxSystem::build(&sp, N_POWERS);
        let selected = |f: &str| opts.families.is_empty() || opts.families.iter().any(|x| x == f);
        let tr = if NEEDS_TRANSMUTATION.iter().any(|f| selected(f)) {
            Some(Transmutations::new(&sp, opts.goursat)?)
        } else {
            None
        };
        Ok(Self {
            families: opts.families.clone(),
            corpus: corpus(*sp.grid()),
            sp,
            table,
            aux,
            tr,
            fine,
            offset: opts.corrupt_u0,
            out: Vec::new(),
        })
    }

    fn ops(&self) -> SusyOps<'_, T> {
        let ops = SusyOps::new(&self.sp);
        match self.offset {
            Some(c) => ops.with_u0_offset(c),
            None => ops,
        }
    }

    fn norm_c(&self, f: &ComplexField<T>) -> f64 {
        let v = if self.fine {
            f.coarse_interior_max_abs(MARGIN)
        } else {
            f.interior_max_abs(MARGIN)
        };
        v.to_f64_lossy()
    }

    fn norm_r(&self, f: &ScalarField<T>) -> f64 {
        self.norm_c(&f.to_complex())
    }

    fn norm_v(&self, v: &VectorField2<T>) -> f64 {
        self.norm_r(&v.c1).max(self.norm_r(&v.c2))
    }

    fn selected(&self, family: &str) -> bool {
        self.families.is_empty() || self.families.iter().any(|f| f == family)
    }

    fn tr(&self) -> &Transmutations<T> {
        self.tr.as_ref().expect("transmutations are built when a family needs them")
    }

    fn push(&mut self, identity: String, reference: &'static str, cap: Cap, ratio: bool, residual: f64) {
        if !self.selected(reference) {
            return;
        }
        self.out.push(Measurement {
            identity,
            reference,
            cap,
            ratio,
            residual,
        });
    }

    fn z(&self, m: usize, n: usize, u: Unit) -> &ComplexField<T> {
        self.table.get(m, n, u).expect("table holds every order up to N_POWERS")
    }

    /// Largest corpus residual, each normalized by its member's scale.
    fn over_corpus(&self, f: impl Fn(&ComplexField<T>) -> f64) -> f64 {
        self.corpus
            .iter()
            .map(|(_, w)| f(w) / scale(w).to_f64_lossy())
            .fold(0.0, f64::max)
    }

    fn measure(&mut self) -> Result<()> {
        let any = |l: &Self, fs: &[&str]| fs.iter().any(|f| l.selected(f));
        if any(self, &["analytic-limit"]) {
            self.analytic_limit();
        }
        if any(self, &["vekua"]) {
            self.vekua();
        }
        if any(self, &["zero-modes"]) {
            self.zero_modes();
        }
        if any(self, &["ground-states"]) {
            self.ground_states();
        }
        if any(self, &["darboux", "factorization", "darboux-products", "intertwining", "nilpotency"]) {
            self.operator_identities();
        }
        if any(self, &["transmutation"]) {
            self.transmutation_powers();
        }
        if any(self, &["transmuted-powers"]) {
            self.transmuted_powers();
        }
        if any(self, &["commuting-diagram", "integral-diagram", "laplacian-corollary"]) {
            self.diagrams();
        }
        if any(self, &["conjugate"]) {
            self.conjugate()?;
        }
        if any(self, &["expansion"]) {
            self.expansion()?;
        }
        Ok(())
    }

    fn analytic_limit(&mut self) {
        if !self.sp.is_zero() {
            return;
        }
        for n in 0..=N_POWERS {
            let zn = ComplexField::from_fn(*self.sp.grid(), |x, y| Complex::new(x, y).powi(n as i32));
            let r = self.norm_c(&(self.z(0, n, Unit::One) - &zn));
            self.push(format!("Z^({n})(1) - z^{n}"), "analytic-limit", Cap::H2(50.0), true, r);
        }
    }

    fn vekua(&mut self) {
        for n in 0..=5 {
            let ops = self.ops();
            let (mut r0, mut r1) = (0.0f64, 0.0f64);
            for u in Unit::BOTH {
                r0 = r0.max(self.norm_c(&ops.vekua(VekuaKind::V, self.z(0, n, u))));
                r1 = r1.max(self.norm_c(&ops.vekua(VekuaKind::V1, self.z(1, n, u))));
            }
            self.push(format!("V Z^({n})(a)"), "vekua", Cap::H2(100.0), true, r0);
            self.push(format!("V1 Z1^({n})(a)"), "vekua", Cap::H2(100.0), true, r1);
        }
    }

    fn zero_modes(&mut self) {
        let ops = self.ops();
        let a = self.norm_r(&ops.h0(&self.sp.exp_field(-T::one())));
        let b = self.norm_r(&ops.h2(&self.sp.exp_field(T::one())));
        self.push("H0 e^-chi".into(), "zero-modes", Cap::H2(10.0), true, a);
        self.push("H2 e^chi".into(), "zero-modes", Cap::H2(10.0), true, b);
    }

    fn ground_states(&mut self) {
        for n in 0..=4 {
            let ops = self.ops();
            let (mut a, mut b) = (0.0f64, 0.0f64);
            for u in Unit::BOTH {
                let z = self.z(0, n, u);
                a = a.max(self.norm_v(&ops.h(&project_p(z))));
                b = b.max(self.norm_v(&ops.h1(&project_p(&ops.bers(z)))));
            }
            self.push(format!("H P Z^({n})(a)"), "ground-states", Cap::H2(200.0), true, a);
            self.push(format!("H1 P bers Z^({n})(a)"), "ground-states", Cap::H2(200.0), true, b);
        }
    }

    fn operator_identities(&mut self) {
        let darboux = [
            ("D P - 2 P Vbar", DarbouxKind::D, VekuaKind::Vbar, 2.0),
            ("Ddag P + 2 P V1", DarbouxKind::Ddag, VekuaKind::V1, -2.0),
            ("D1 P - 2 P V1bar", DarbouxKind::D1, VekuaKind::V1bar, 2.0),
            ("D1dag P + 2 P V", DarbouxKind::D1dag, VekuaKind::V, -2.0),
        ];
        for (name, d, v, c) in darboux {
            let r = self.over_corpus(|w| {
                let ops = self.ops();
                let lhs = ops.darboux(d, &project_p(w));
                self.norm_v(&lhs.sub(&project_p(&ops.vekua(v, w)).scale(T::lit(c))))
            });
            self.push(name.into(), "darboux", Cap::H2(100.0), true, r);
        }

        let four = T::lit(4.0);
        let r = self.over_corpus(|w| {
            let ops = self.ops();
            let lhs = ops.h(&project_p(w));
            let rhs = project_p(&ops.vekua(VekuaKind::V1, &ops.vekua(VekuaKind::Vbar, w)));
            self.norm_v(&lhs.add(&rhs.scale(four)))
        });
        self.push("H P + 4 P V1 Vbar".into(), "factorization", Cap::H2(100.0), true, r);
        let r = self.over_corpus(|w| {
            let ops = self.ops();
            let lhs = ops.h1(&project_p(w));
            let rhs = project_p(&ops.vekua(VekuaKind::Vbar, &ops.vekua(VekuaKind::V1, w)));
            self.norm_v(&lhs.add(&rhs.scale(four)))
        });
        self.push("H1 P + 4 P Vbar V1".into(), "factorization", Cap::H2(100.0), true, r);
        let r = self.over_corpus(|w| {
            let ops = self.ops();
            let lhs = ops.h1_tilde(&project_p(w));
            let rhs = project_p(&ops.vekua(VekuaKind::V, &ops.vekua(VekuaKind::V1bar, w)));
            self.norm_v(&lhs.add(&rhs.scale(four)))
        });
        self.push("H1~ P + 4 P V V1bar".into(), "factorization", Cap::H2(100.0), true, r);

        let products = [
            ("Ddag D - H", DarbouxKind::Ddag, DarbouxKind::D),
            ("D Ddag - H1", DarbouxKind::D, DarbouxKind::Ddag),
            ("D1dag D1 - H1~", DarbouxKind::D1dag, DarbouxKind::D1),
        ];
        for (name, outer, inner) in products {
            let r = self.over_corpus(|w| {
                let ops = self.ops();
                let v = project_p(w);
                let lhs = ops.darboux(outer, &ops.darboux(inner, &v));
                let rhs = match inner {
                    DarbouxKind::D => ops.h(&v),
                    DarbouxKind::Ddag => ops.h1(&v),
                    _ => ops.h1_tilde(&v),
                };
                self.norm_v(&lhs.sub(&rhs))
            });
            self.push(name.into(), "darboux-products", Cap::H2(100.0), true, r);
        }

        for rel in Intertwining::ALL {
            let r = self.over_corpus(|w| {
                let ops = self.ops();
                let mut m = 0.0f64;
                for f in [w.re(), w.im()] {
                    for i in 1..=2 {
                        m = m.max(self.norm_r(&ops.intertwining_residual(rel, i, &f)));
                    }
                }
                m
            });
            self.push(format!("{rel:?}"), "intertwining", Cap::H2(100.0), true, r);
        }

        let r = self.over_corpus(|w| {
            let ops = self.ops();
            let (a, b) = ops.nilpotency_residuals(&w.re());
            self.norm_r(&a).max(self.norm_r(&b))
        });
        self.push("p+ q- and q+ p- sums".into(), "nilpotency", Cap::H2(100.0), true, r);
    }

    fn transmutation_powers(&mut self) {
        for (j, name) in [(1usize, "x"), (2, "y")] {
            let tr = self.tr();
            let (axis, sys) = if j == 1 { (&tr.x, &self.aux.x) } else { (&tr.y, &self.aux.y) };
            let grid = *axis.grid();
            let nodes = grid.nodes();
            let lo = MARGIN;
            let hi = grid.len() - MARGIN;
            let step = if self.fine { 2 } else { 1 };
            let lo = lo * step;
            let hi = grid.len() - (grid.len() - hi) * step;
            let mut found = Vec::new();
            for k in 0..=5 {
                let f: Vec<T> = nodes.iter().map(|s| s.powi(k as i32)).collect();
                let mut worst = 0.0f64;
                for (variant, want) in [(Variant::T, &sys.sys[k]), (Variant::Ttilde, &sys.sys_tilde[k])] {
                    let got = axis.apply(variant, &f);
                    let sc = want.iter().fold(T::one(), |m, v| m.max(v.abs()));
                    let d = (lo..hi)
                        .step_by(step)
                        .fold(T::zero(), |m, i| m.max((got[i] - want[i]).abs()));
                    worst = worst.max((d / sc).to_f64_lossy());
                }
                found.push((k, worst));
            }
            for (k, worst) in found {
                self.push(format!("T_{j}[{name}^{k}] - phi_{k}"), "transmutation", Cap::H2(400.0), true, worst);
            }
        }
    }

    fn transmuted_powers(&mut self) {
        for n in 0..=4 {
            let (mut a, mut b) = (0.0f64, 0.0f64);
            for u in Unit::BOTH {
                let c: Complex<T> = u.value();
                let zn = ComplexField::from_fn(*self.sp.grid(), |x, y| Complex::new(x, y).powi(n as i32) * c);
                a = a.max(self.norm_c(&(&self.tr().t0(&zn) - self.z(0, n, u))));
                b = b.max(self.norm_c(&(&self.tr().t1(&zn) - self.z(1, n, u))));
            }
            self.push(format!("T0[a z^{n}] - Z^({n})(a)"), "transmuted-powers", Cap::H2(300.0), true, a);
            self.push(format!("T1[a z^{n}] - Z1^({n})(a)"), "transmuted-powers", Cap::H2(300.0), true, b);
        }
    }

    fn diagrams(&mut self) {
        let this: &Self = self;
        let z0 = this.sp.grid().origin();
        let tr = this.tr();
        type Diagram<'a, T> = (&'static str, &'static str, Box<dyn Fn(&ComplexField<T>) -> ComplexField<T> + 'a>);
        let checks: Vec<Diagram<'_, T>> = vec![
            (
                "V T0 - T1 dzbar",
                "commuting-diagram",
                Box::new(|w| &this.ops().vekua(VekuaKind::V, &tr.t0(w)) - &tr.t1(&d_zbar(w))),
            ),
            (
                "V1 T1 - T0 dzbar",
                "commuting-diagram",
                Box::new(|w| &this.ops().vekua(VekuaKind::V1, &tr.t1(w)) - &tr.t0(&d_zbar(w))),
            ),
            (
                "bers T0 - T1 dz",
                "commuting-diagram",
                Box::new(|w| &this.ops().bers(&tr.t0(w)) - &tr.t1(&d_z(w))),
            ),
            (
                "bers1 T1 - T0 dz",
                "commuting-diagram",
                Box::new(|w| &this.ops().bers_successor(&tr.t1(w)) - &tr.t0(&d_z(w))),
            ),
            (
                "int T0 d(F1,G1) - T1 int",
                "integral-diagram",
                Box::new(|w| {
                    &fg_integral(1, &this.sp, &tr.t0(w), z0) - &tr.t1(&contour_integral_l(w, z0, PathOrder::XThenY))
                }),
            ),
            (
                "int T1 d(F,G) - T0 int",
                "integral-diagram",
                Box::new(|w| {
                    &fg_integral(0, &this.sp, &tr.t1(w), z0) - &tr.t0(&contour_integral_l(w, z0, PathOrder::XThenY))
                }),
            ),
        ];
        let mut rows = Vec::new();
        for (name, tag, f) in &checks {
            rows.push((name.to_string(), *tag, this.over_corpus(|w| this.norm_c(&f(w)))));
        }
        drop(checks);
        let r = this.over_corpus(|w| {
            let ops = this.ops();
            let lhs = ops.h(&project_p(&tr.t0(w)));
            this.norm_v(&lhs.add(&project_p(&tr.t0(&laplacian(w)))))
        });
        rows.push(("H P T0 + P T0 Lap".into(), "laplacian-corollary", r));
        let r = this.over_corpus(|w| {
            let ops = this.ops();
            let lhs = ops.h1(&project_p(&tr.t1(w)));
            this.norm_v(&lhs.add(&project_p(&tr.t1(&laplacian(w)))))
        });
        rows.push(("H1 P T1 + P T1 Lap".into(), "laplacian-corollary", r));
        for (name, tag, r) in rows {
            self.push(name, tag, Cap::H2(300.0), true, r);
        }
    }

    fn conjugate(&mut self) -> Result<()> {
        let z = self.z(0, 1, Unit::One).clone();
        let res = conjugate_from_w1(&self.sp, &z.re())?;
        let target = z.im();
        let mode = self.sp.exp_field(-T::one());
        let (c, _) = fit_gauge(&res.partner, &target, &mode);
        let diff = &(&res.partner + &mode.scale(c)) - &target;
        let r = self.norm_r(&diff) / scale(&z).to_f64_lossy();
        self.push("Re Z^(1)(1) -> Im Z^(1)(1)".into(), "conjugate", Cap::H2(50.0), true, r);
        Ok(())
    }

    fn expansion(&mut self) -> Result<()> {
        for kind in [BasisKind::KerH0, BasisKind::KerH2] {
            for n in 0..=4 {
                for u in Unit::BOTH {
                    let z = self.z(0, n, u);
                    let target = match kind {
                        BasisKind::KerH0 => z.im(),
                        BasisKind::KerH2 => z.re(),
                    };
                    if target.max_abs() == T::zero() {
                        continue;
                    }
                    let fit = fit_formal_polynomial(&self.sp, &target, kind, &self.table, 4)?;
                    let hit = FitResult::<T>::slot(n, u);
                    let off = fit
                        .coefficients
                        .iter()
                        .enumerate()
                        .map(|(k, c)| {
                            let want = if k == hit { T::one() } else { T::zero() };
                            (*c - want).abs().to_f64_lossy()
                        })
                        .fold(0.0, f64::max);
                    let part = if kind == BasisKind::KerH0 { "Im" } else { "Re" };
                    let label = format!("{part} Z^({n})({})", u.label());
                    self.push(format!("self-fit {label} coefficients"), "expansion", Cap::Abs(1e-6), false, off);
                    // the fit residual is judged against the fixed 10 h^2 cap
                    let r = fit.residual_max.to_f64_lossy();
                    self.push(format!("self-fit {label} residual"), "expansion", Cap::H2(10.0), false, r);
                }
            }
        }
        for n in 0..=4 {
            for u in Unit::BOTH {
                let w = self.z(0, n, u).clone();
                let label = format!("taylor round trip Z^({n})({})", u.label());
                match taylor_coefficients(&self.sp, &w, &self.table, 4) {
                    Ok(c) => {
                        let r = series_residual(&c, &self.table, &w)?.to_f64_lossy();
                        let bound = round_trip_bound(&c, &self.table, &w)?.to_f64_lossy();
                        // residual over bound: passes at <= 1
                        self.push(label, "expansion", Cap::Abs(1.0), false, r / bound);
                    }
                    Err(Error::NoiseTooLarge { .. }) => self.push(label, "expansion", Cap::Abs(1.0), false, f64::INFINITY),
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(())
    }
}

fn grid_label<T: Real>(sp: &Superpotential<T>) -> String {
    format!("{}x{}", sp.grid().nx(), sp.grid().ny())
}

/// Runs the battery for `sp` and its `2N - 1` refinement.
pub fn run_verify<T: Real>(sp: &Superpotential<T>, opts: &VerifyOptions<T>) -> Result<Report> {
    if let Some(f) = opts.families.iter().find(|f| !FAMILIES.contains(&f.as_str())) {
        return Err(Error::Config(format!(
            "unknown identity family `{f}`; known: {}",
            FAMILIES.join(", ")
        )));
    }
    let fine_sp = sp.resampled(sp.grid().refined())?;
    let mut coarse = Level::new(sp.clone(), false, opts)?;
    coarse.measure()?;
    let mut fine = Level::new(fine_sp, true, opts)?;
    fine.measure()?;
    let h = sp.grid().h().to_f64_lossy();
    let hf = fine.sp.grid().h().to_f64_lossy();
    let grid = format!("{}/{}", grid_label(sp), grid_label(&fine.sp));
    let mut rows = Vec::with_capacity(coarse.out.len());
    for (c, f) in coarse.out.iter().zip(&fine.out) {
        debug_assert_eq!(c.identity, f.identity);
        // caps that scale with h^2 are judged at the matching resolution
        let cap = c.cap.value(h);
        let cap_fine = match c.cap {
            Cap::H2(_) => c.cap.value(hf),
            Cap::Abs(v) => v,
        };
        let mut ok = c.residual <= cap && f.residual <= cap_fine;
        let mut ratio = None;
        if c.ratio && c.residual > opts.exact_floor {
            let q = c.residual / f.residual;
            ok &= q >= opts.ratio_band.0 && q <= opts.ratio_band.1;
            ratio = Some(q);
        }
        rows.push(ReportRow {
            identity: c.identity.clone(),
            reference: c.reference.to_string(),
            grid: grid.clone(),
            residual: c.residual,
            residual_fine: f.residual,
            cap,
            ratio,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        });
    }
    Ok(Report {
        superpotential: sp.name().to_string(),
        params: sp.params().iter().map(|p| p.to_f64_lossy()).collect(),
        grid: grid_label(sp),
        grid_fine: grid_label(&fine.sp),
        corrupted_u0: opts.corrupt_u0.map(|c| c.to_f64_lossy()),
        passed: rows.iter().all(|r| r.verdict == Verdict::Pass),
        rows,
    })
}
