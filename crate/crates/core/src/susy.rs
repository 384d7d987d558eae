//! Supercharges, super-Hamiltonian components, Darboux transforms and the
//! Vekua/Bers operators of a separable superpotential, acting on sampled fields.

use num_complex::Complex;

use crate::diff::{d_x, d_y, d_z, d_zbar, laplacian};
use crate::field::{ComplexField, ScalarField, VectorField2};
use crate::scalar::Real;
use crate::superpotential::{potentials, Potentials, Superpotential};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Charge {
    Q,
    P,
}

/// One supercharge component `q_i^s` or `p_i^s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OperatorTag {
    pub kind: Charge,
    pub sign: Sign,
    pub index: usize,
}

/// `epsilon_{ik}` with `epsilon_12 = 1`.
pub const EPSILON: [[i8; 2]; 2] = [[0, 1], [-1, 0]];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VekuaKind {
    /// `dzbar - (dzbar chi) C`
    V,
    /// `dz - (dz chi) C`
    Vbar,
    /// `dzbar + (dz chi) C`
    V1,
    /// `dz + (dzbar chi) C`
    V1bar,
}

/// The four intertwining relations between `H0`, `H2` and `H1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Intertwining {
    /// `H0 q_i^+ = sum_k q_k^+ H1_ki`
    H0QPlus,
    /// `q_i^- H0 = sum_k H1_ik q_k^-`
    QMinusH0,
    /// `H2 p_i^+ = sum_k p_k^+ H1_ki`
    H2PPlus,
    /// `p_i^- H2 = sum_k H1_ik p_k^-`
    PMinusH2,
}

impl Intertwining {
    pub const ALL: [Intertwining; 4] = [
        Intertwining::H0QPlus,
        Intertwining::QMinusH0,
        Intertwining::H2PPlus,
        Intertwining::PMinusH2,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DarbouxKind {
    D,
    Ddag,
    D1,
    D1dag,
}

/// Operator algebra of one superpotential, with its derivative fields cached.
#[derive(Clone, Debug)]
pub struct SusyOps<'a, T> {
    sp: &'a Superpotential<T>,
    grad: [ScalarField<T>; 2],
    pots: Potentials<T>,
    chi_z: ComplexField<T>,
    chi_zbar: ComplexField<T>,
}

impl<'a, T: Real> SusyOps<'a, T> {
    pub fn new(sp: &'a Superpotential<T>) -> Self {
        let chi_z = sp.dz_chi();
        Self {
            sp,
            grad: [sp.dchi_field(1), sp.dchi_field(2)],
            pots: potentials(sp),
            chi_zbar: chi_z.conj(),
            chi_z,
        }
    }

    /// Shifts `U0` by a constant. Only meant for exercising failure paths.
    pub fn with_u0_offset(mut self, offset: T) -> Self {
        self.pots.u0 = self.pots.u0.map(|v| v + offset);
        self
    }

    pub fn superpotential(&self) -> &Superpotential<T> {
        self.sp
    }

    pub fn potentials(&self) -> &Potentials<T> {
        &self.pots
    }

    fn partial(&self, i: usize, f: &ScalarField<T>) -> ScalarField<T> {
        match i {
            1 => d_x(f),
            2 => d_y(f),
            _ => panic!("axis index must be 1 or 2, got {i}"),
        }
    }

    /// `q_i^{+-} f = -+ d_i f + (d_i chi) f`.
    pub fn q(&self, i: usize, sign: Sign, f: &ScalarField<T>) -> ScalarField<T> {
        let d = self.partial(i, f);
        let m = f.mul(&self.grad[i - 1]);
        match sign {
            Sign::Plus => &m - &d,
            Sign::Minus => &m + &d,
        }
    }

    /// `p_i^{+-} = sum_k epsilon_ik q_k^{-+}`.
    pub fn p(&self, i: usize, sign: Sign, f: &ScalarField<T>) -> ScalarField<T> {
        let mut out = ScalarField::zeros(*f.grid());
        for k in 1..=2 {
            match EPSILON[i - 1][k - 1] {
                1 => out = &out + &self.q(k, sign.flip(), f),
                -1 => out = &out - &self.q(k, sign.flip(), f),
                _ => {}
            }
        }
        out
    }

    pub fn apply(&self, tag: OperatorTag, f: &ScalarField<T>) -> ScalarField<T> {
        match tag.kind {
            Charge::Q => self.q(tag.index, tag.sign, f),
            Charge::P => self.p(tag.index, tag.sign, f),
        }
    }

    fn schrodinger(&self, u: &ScalarField<T>, f: &ScalarField<T>) -> ScalarField<T> {
        &f.mul(u) - &laplacian(f)
    }

    /// `H0 f = -Lap f + U0 f`.
    pub fn h0(&self, f: &ScalarField<T>) -> ScalarField<T> {
        self.schrodinger(&self.pots.u0, f)
    }

    /// `H2 f = -Lap f + U2 f`.
    pub fn h2(&self, f: &ScalarField<T>) -> ScalarField<T> {
        self.schrodinger(&self.pots.u2, f)
    }

    fn matrix(&self, v: &VectorField2<T>, tilde: bool) -> VectorField2<T> {
        let h = &self.pots.h1;
        let off = if tilde { -T::one() } else { T::one() };
        let row = |i: usize| {
            let j = 1 - i;
            let diag = &v.component(i + 1).mul(&h[i][i]) - &laplacian(v.component(i + 1));
            &diag + &v.component(j + 1).mul(&h[i][j]).scale(off)
        };
        VectorField2 { c1: row(0), c2: row(1) }
    }

    pub fn h1(&self, v: &VectorField2<T>) -> VectorField2<T> {
        self.matrix(v, false)
    }

    /// `H1` with the sign of its off-diagonal entries flipped.
    pub fn h1_tilde(&self, v: &VectorField2<T>) -> VectorField2<T> {
        self.matrix(v, true)
    }

    /// Scalar entry `H1_ij f = delta_ij H0 f + 2 (d_i d_j chi) f`.
    pub fn h1_entry(&self, i: usize, j: usize, f: &ScalarField<T>) -> ScalarField<T> {
        let pot = f.mul(&self.pots.h1[i - 1][j - 1]);
        if i == j {
            &pot - &laplacian(f)
        } else {
            pot
        }
    }

    /// Residual of one of the four intertwining relations for component `i`.
    pub fn intertwining_residual(
        &self,
        relation: Intertwining,
        i: usize,
        f: &ScalarField<T>,
    ) -> ScalarField<T> {
        let mut rhs = ScalarField::zeros(*f.grid());
        let lhs = match relation {
            Intertwining::H0QPlus => {
                for k in 1..=2 {
                    rhs = &rhs + &self.q(k, Sign::Plus, &self.h1_entry(k, i, f));
                }
                self.h0(&self.q(i, Sign::Plus, f))
            }
            Intertwining::QMinusH0 => {
                for k in 1..=2 {
                    rhs = &rhs + &self.h1_entry(i, k, &self.q(k, Sign::Minus, f));
                }
                self.q(i, Sign::Minus, &self.h0(f))
            }
            Intertwining::H2PPlus => {
                for k in 1..=2 {
                    rhs = &rhs + &self.p(k, Sign::Plus, &self.h1_entry(k, i, f));
                }
                self.h2(&self.p(i, Sign::Plus, f))
            }
            Intertwining::PMinusH2 => {
                for k in 1..=2 {
                    rhs = &rhs + &self.h1_entry(i, k, &self.p(k, Sign::Minus, f));
                }
                self.p(i, Sign::Minus, &self.h2(f))
            }
        };
        &lhs - &rhs
    }

    /// `(sum_k p_k^+ q_k^- f, sum_k q_k^+ p_k^- f)`, both of which vanish.
    pub fn nilpotency_residuals(&self, f: &ScalarField<T>) -> (ScalarField<T>, ScalarField<T>) {
        let mut a = ScalarField::zeros(*f.grid());
        let mut b = ScalarField::zeros(*f.grid());
        for k in 1..=2 {
            a = &a + &self.p(k, Sign::Plus, &self.q(k, Sign::Minus, f));
            b = &b + &self.q(k, Sign::Plus, &self.p(k, Sign::Minus, f));
        }
        (a, b)
    }

    /// `diag(H0, H2)`.
    pub fn h(&self, v: &VectorField2<T>) -> VectorField2<T> {
        VectorField2 {
            c1: self.h0(&v.c1),
            c2: self.h2(&v.c2),
        }
    }

    pub fn vekua(&self, kind: VekuaKind, w: &ComplexField<T>) -> ComplexField<T> {
        let (d, coeff, sign) = match kind {
            VekuaKind::V => (d_zbar(w), &self.chi_zbar, -T::one()),
            VekuaKind::Vbar => (d_z(w), &self.chi_z, -T::one()),
            VekuaKind::V1 => (d_zbar(w), &self.chi_z, T::one()),
            VekuaKind::V1bar => (d_z(w), &self.chi_zbar, T::one()),
        };
        let mut out = d;
        for ((o, c), wv) in out.values_mut().iter_mut().zip(coeff.values()).zip(w.values()) {
            *o += *c * wv.conj() * sign;
        }
        out
    }

    /// Bers derivative for the pair `(e^chi, i e^{-chi})`.
    pub fn bers(&self, w: &ComplexField<T>) -> ComplexField<T> {
        self.vekua(VekuaKind::Vbar, w)
    }

    /// Bers derivative for the successor pair.
    pub fn bers_successor(&self, w: &ComplexField<T>) -> ComplexField<T> {
        self.vekua(VekuaKind::V1bar, w)
    }

    pub fn darboux(&self, kind: DarbouxKind, v: &VectorField2<T>) -> VectorField2<T> {
        use Charge::{P, Q};
        use Sign::{Minus, Plus};
        let t = |kind, sign, index| OperatorTag { kind, sign, index };
        let rows = match kind {
            DarbouxKind::D => [[t(Q, Minus, 1), t(P, Minus, 1)], [t(Q, Minus, 2), t(P, Minus, 2)]],
            DarbouxKind::Ddag => [[t(Q, Plus, 1), t(Q, Plus, 2)], [t(P, Plus, 1), t(P, Plus, 2)]],
            DarbouxKind::D1 => [[t(P, Minus, 2), t(P, Minus, 1)], [t(Q, Minus, 2), t(Q, Minus, 1)]],
            DarbouxKind::D1dag => [[t(P, Plus, 2), t(Q, Plus, 2)], [t(P, Plus, 1), t(Q, Plus, 1)]],
        };
        let row = |r: [OperatorTag; 2]| &self.apply(r[0], &v.c1) + &self.apply(r[1], &v.c2);
        VectorField2 {
            c1: row(rows[0]),
            c2: row(rows[1]),
        }
    }
}

/// `P w = (Im w, Re w)`.
pub fn project_p<T: Real>(w: &ComplexField<T>) -> VectorField2<T> {
    VectorField2 {
        c1: project_pminus(w),
        c2: project_pplus(w),
    }
}

/// `P+ w = Re w`.
pub fn project_pplus<T: Real>(w: &ComplexField<T>) -> ScalarField<T> {
    w.re()
}

/// `P- w = Im w`.
pub fn project_pminus<T: Real>(w: &ComplexField<T>) -> ScalarField<T> {
    w.im()
}

/// Inverse of [`project_p`]: `(v1, v2) -> v2 + i v1`.
pub fn unproject<T: Real>(v: &VectorField2<T>) -> ComplexField<T> {
    ComplexField::from_parts(&v.c2, &v.c1)
}

/// Conjugation `C w = conj(w)`.
pub fn conjugate<T: Real>(w: &ComplexField<T>) -> ComplexField<T> {
    w.map(|v: Complex<T>| v.conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;

    fn setup(name: &str, p: &[f64], n: usize) -> Superpotential<f64> {
        Superpotential::catalog(name, p, Grid2D::square(1.0, n).unwrap()).unwrap()
    }

    fn smooth(g: Grid2D<f64>) -> ComplexField<f64> {
        ComplexField::from_fn(g, |x, y| {
            let e = (-(x * x + y * y)).exp();
            Complex::new(e * (1.0 + x * y), (x - 0.5 * y * y) * e)
        })
    }

    #[test]
    fn zero_mode_of_q_minus() {
        let sp = setup("linear", &[1.0, 0.0], 41);
        let ops = SusyOps::new(&sp);
        let f = sp.exp_field(-1.0);
        assert!(ops.q(1, Sign::Minus, &f).interior_max_abs(1) < 5e-3);
    }

    #[test]
    fn free_charges_are_derivatives() {
        let sp = setup("zero", &[], 21);
        let ops = SusyOps::new(&sp);
        let f = ScalarField::from_fn(*sp.grid(), |x, y| x * x * y);
        assert_eq!(ops.q(1, Sign::Minus, &f), d_x(&f));
        assert_eq!(ops.q(2, Sign::Plus, &f), -&d_y(&f));
        assert_eq!(ops.p(1, Sign::Plus, &f), ops.q(2, Sign::Minus, &f));
        assert_eq!(ops.p(2, Sign::Plus, &f), -&ops.q(1, Sign::Minus, &f));
    }

    #[test]
    fn commutator_on_constant() {
        let sp = setup("quadratic", &[1.0, 1.0], 41);
        let ops = SusyOps::new(&sp);
        let one = ScalarField::from_fn(*sp.grid(), |_, _| 1.0);
        for i in 1..=2 {
            for j in 1..=2 {
                let a = ops.q(i, Sign::Minus, &ops.q(j, Sign::Plus, &one));
                let b = ops.q(j, Sign::Plus, &ops.q(i, Sign::Minus, &one));
                let c = &a - &b;
                let want = if i == j { 2.0 } else { 0.0 };
                assert!(c.map(|v| v - want).interior_max_abs(2) < 1e-10, "({i},{j})");
            }
        }
    }

    #[test]
    fn hamiltonians_from_charges() {
        let sp = setup("quadratic", &[1.0, 0.5], 101);
        let ops = SusyOps::new(&sp);
        let f = smooth(*sp.grid()).re();
        let mut h0 = ScalarField::zeros(*sp.grid());
        let mut h2 = ScalarField::zeros(*sp.grid());
        for k in 1..=2 {
            h0 = &h0 + &ops.q(k, Sign::Plus, &ops.q(k, Sign::Minus, &f));
            h2 = &h2 + &ops.p(k, Sign::Plus, &ops.p(k, Sign::Minus, &f));
        }
        let h = sp.grid().h();
        assert!((&h0 - &ops.h0(&f)).interior_max_abs(2) < 50.0 * h * h);
        assert!((&h2 - &ops.h2(&f)).interior_max_abs(2) < 50.0 * h * h);
    }

    #[test]
    fn zero_modes() {
        let sp = setup("quadratic", &[1.0, 1.0], 201);
        let ops = SusyOps::new(&sp);
        assert!(ops.h0(&sp.exp_field(-1.0)).interior_max_abs(2) <= 1e-3);
        assert!(ops.h2(&sp.exp_field(1.0)).interior_max_abs(2) <= 1e-3);
        let free = setup("zero", &[], 21);
        let fo = SusyOps::new(&free);
        let r2 = ScalarField::from_fn(*free.grid(), |x, y| x * x + y * y);
        assert!(fo.h0(&r2).map(|v| v + 4.0).interior_max_abs(1) < 1e-12);
    }

    #[test]
    fn corrupted_u0_breaks_zero_mode() {
        let sp = setup("quadratic", &[1.0, 1.0], 101);
        let ops = SusyOps::new(&sp).with_u0_offset(1.0);
        assert!(ops.h0(&sp.exp_field(-1.0)).interior_max_abs(2) > 0.1);
    }

    #[test]
    fn vekua_operators_on_pair() {
        let sp = setup("quadratic", &[1.0, 1.0], 201);
        let ops = SusyOps::new(&sp);
        let f = sp.exp_field(1.0).to_complex();
        let g = ComplexField::from_parts(&ScalarField::zeros(*sp.grid()), &sp.exp_field(-1.0));
        assert!(ops.vekua(VekuaKind::V, &f).interior_max_abs(1) < 1e-3);
        assert!(ops.vekua(VekuaKind::V, &g).interior_max_abs(1) < 1e-3);
        assert!(ops.bers(&f).interior_max_abs(1) < 1e-3);
        let w = smooth(*sp.grid());
        let lhs = conjugate(&ops.vekua(VekuaKind::V, &w));
        let rhs = ops.vekua(VekuaKind::Vbar, &conjugate(&w));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn free_vekua_is_cauchy_riemann() {
        let sp = setup("zero", &[], 21);
        let ops = SusyOps::new(&sp);
        let z2 = ComplexField::from_fn(*sp.grid(), |x, y| Complex::new(x, y).powi(2));
        assert!(ops.vekua(VekuaKind::V, &z2).interior_max_abs(1) < 1e-12);
        let d = ops.bers(&z2);
        let two_z = ComplexField::from_fn(*sp.grid(), |x, y| Complex::new(2.0 * x, 2.0 * y));
        assert!((&d - &two_z).interior_max_abs(1) < 1e-12);
    }

    #[test]
    fn projections() {
        let g = Grid2D::square(1.0, 5).unwrap();
        let w = ComplexField::from_fn(g, |_, _| Complex::new(1.0, 2.0));
        let p = project_p(&w);
        assert_eq!((p.c1.at(0, 0), p.c2.at(0, 0)), (2.0, 1.0));
        assert_eq!(unproject(&p), w);
        let i = ComplexField::from_fn(g, |_, _| Complex::new(0.0, 1.0));
        let p = project_p(&i);
        assert_eq!((p.c1.at(3, 1), p.c2.at(3, 1)), (1.0, 0.0));
    }

    #[test]
    fn darboux_of_constants_vanishes_when_free() {
        let sp = setup("zero", &[], 11);
        let ops = SusyOps::new(&sp);
        let one = ScalarField::from_fn(*sp.grid(), |_, _| 1.0);
        let v = VectorField2 { c1: one.clone(), c2: one };
        assert_eq!(ops.darboux(DarbouxKind::D, &v).max_abs(), 0.0);
    }

    #[test]
    fn darboux_projection_is_exact() {
        let sp = setup("quadratic", &[1.0, -0.7], 41);
        let ops = SusyOps::new(&sp);
        let w = smooth(*sp.grid());
        let pw = project_p(&w);
        let cases = [
            (DarbouxKind::D, VekuaKind::Vbar, 2.0),
            (DarbouxKind::Ddag, VekuaKind::V1, -2.0),
            (DarbouxKind::D1, VekuaKind::V1bar, 2.0),
            (DarbouxKind::D1dag, VekuaKind::V, -2.0),
        ];
        for (d, v, c) in cases {
            let lhs = ops.darboux(d, &pw);
            let rhs = project_p(&ops.vekua(v, &w)).scale(c);
            assert!(lhs.sub(&rhs).max_abs() < 1e-12, "{d:?}");
        }
    }

    #[test]
    fn factorizations() {
        let sp = setup("quadratic", &[1.0, 1.0], 201);
        let ops = SusyOps::new(&sp);
        let w = smooth(*sp.grid());
        let h = sp.grid().h();
        let pw = project_p(&w);
        let v1vb = project_p(&ops.vekua(VekuaKind::V1, &ops.vekua(VekuaKind::Vbar, &w))).scale(4.0);
        assert!(ops.h(&pw).add(&v1vb).interior_max_abs(2) < 100.0 * h * h);
        let vbv1 = project_p(&ops.vekua(VekuaKind::Vbar, &ops.vekua(VekuaKind::V1, &w))).scale(4.0);
        assert!(ops.h1(&pw).add(&vbv1).interior_max_abs(2) < 100.0 * h * h);
        let vv1b = project_p(&ops.vekua(VekuaKind::V, &ops.vekua(VekuaKind::V1bar, &w))).scale(4.0);
        assert!(ops.h1_tilde(&pw).add(&vv1b).interior_max_abs(2) < 100.0 * h * h);
    }

    #[test]
    fn darboux_products() {
        let sp = setup("quadratic", &[1.0, 0.5], 201);
        let ops = SusyOps::new(&sp);
        let v = project_p(&smooth(*sp.grid()));
        let h = sp.grid().h();
        let cap = 100.0 * h * h;
        let dd = ops.darboux(DarbouxKind::Ddag, &ops.darboux(DarbouxKind::D, &v));
        assert!(dd.sub(&ops.h(&v)).interior_max_abs(2) < cap);
        let dd = ops.darboux(DarbouxKind::D, &ops.darboux(DarbouxKind::Ddag, &v));
        assert!(dd.sub(&ops.h1(&v)).interior_max_abs(2) < cap);
        let dd = ops.darboux(DarbouxKind::D1, &ops.darboux(DarbouxKind::D1dag, &v));
        assert!(dd.sub(&ops.h(&v)).interior_max_abs(2) < cap);
        let dd = ops.darboux(DarbouxKind::D1dag, &ops.darboux(DarbouxKind::D1, &v));
        assert!(dd.sub(&ops.h1_tilde(&v)).interior_max_abs(2) < cap);
    }

    #[test]
    fn intertwining() {
        let sp = setup("quadratic", &[1.0, 0.5], 201);
        let ops = SusyOps::new(&sp);
        let f = smooth(*sp.grid()).re();
        let h = sp.grid().h();
        for rel in Intertwining::ALL {
            for i in 1..=2 {
                let r = ops.intertwining_residual(rel, i, &f);
                assert!(r.interior_max_abs(2) < 100.0 * h * h, "{rel:?} {i}");
            }
        }
    }

    #[test]
    fn nilpotency() {
        let sp = setup("quadratic", &[1.0, 0.5], 101);
        let ops = SusyOps::new(&sp);
        let f = smooth(*sp.grid()).im();
        let (a, b) = ops.nilpotency_residuals(&f);
        let h = sp.grid().h();
        assert!(a.interior_max_abs(2) < 10.0 * h * h);
        assert!(b.interior_max_abs(2) < 10.0 * h * h);
    }
}
