use saddle_core::geometry::{yz_coords, NodeClass};
use saddle_core::linalg::GaussLegendre;
use saddle_core::nonlinearity::Nonlinearity;
use saddle_core::profile1d::Profile1D;
use saddle_core::solver::{reflect_odd, solve, Boundary, SolveOptions};
use saddle_core::stability::{
    asymptotic_functional, instability_sweep, linearized_spectrum, nodal_quadratic_form, quadratic_form_yz,
    wedge_constant, Background, Dilated, EtaFamily, FormOptions, Perturbation, PiecewiseLinearEta, Separable,
    SpectrumOptions, SymmetryClass,
};

fn ac() -> Nonlinearity<f64> {
    Nonlinearity::allen_cahn()
}

// xi = (1 - ((y - c)/w)^2)^3 u0dot(z) on [c - w, c + w]
struct Smooth<'a> {
    c: f64,
    w: f64,
    p: &'a Profile1D<f64>,
}

impl Smooth<'_> {
    fn phi(&self, y: f64) -> (f64, f64) {
        let x = (y - self.c) / self.w;
        if x.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let b = 1.0 - x * x;
        (b.powi(3), -6.0 * x * b * b / self.w)
    }

    fn at(&self, y: f64, z: f64) -> f64 {
        self.phi(y).0 * self.p.derivative(z)
    }
}

impl Perturbation<f64> for Smooth<'_> {
    fn eval(&self, y: f64, z: f64) -> (f64, f64, f64) {
        let (e, de) = self.phi(y);
        let pt = self.p.eval(z);
        (e * pt.du, de * pt.du, e * pt.ddu)
    }

    fn y_breaks(&self) -> Vec<f64> {
        vec![self.c - self.w, self.c + self.w]
    }
}

#[test]
fn wedge_form_against_closed_form_profile() {
    let nl = ac();
    let p = Profile1D::build_default(&nl).unwrap();
    let xi = Smooth { c: 5.0, w: 3.0, p: &p };
    let got = quadratic_form_yz(Background::Profile(&p), &xi, &nl, 2, &FormOptions::default()).unwrap();
    // u0 = tanh(z / sqrt 2) in closed form, dense tensor Gauss-Legendre
    let r2 = 2f64.sqrt();
    let gl = GaussLegendre::<f64>::new(16);
    let mut want = 0.0;
    for a in 0..60 {
        let (y0, y1) = (2.0 + 0.1 * a as f64, 2.1 + 0.1 * a as f64);
        want += gl.integrate(y0, y1, |y| {
            let (e, de) = xi.phi(y);
            let n = (2.0 * y / 0.25).ceil() as usize;
            let dz = 2.0 * y / n as f64;
            (0..n)
                .map(|j| {
                    let za = -y + dz * j as f64;
                    gl.integrate(za, za + dz, |z| {
                        let th = (z / r2).tanh();
                        let sech2 = 1.0 - th * th;
                        let d = sech2 / r2;
                        let dd = -th * sech2;
                        let fp = 1.0 - 3.0 * th * th;
                        let w = y * y - z * z;
                        w * ((de * d).powi(2) + (e * dd).powi(2) - fp * (e * d).powi(2))
                    })
                })
                .sum::<f64>()
        });
    }
    assert!((got.value - want).abs() < 1e-6 * want.abs(), "{} vs {want}", got.value);
}

#[test]
fn planar_quotient_is_the_cutoff_quotient() {
    let nl = ac();
    let p = Profile1D::build_default(&nl).unwrap();
    let gl = GaussLegendre::<f64>::new(16);
    let mut last = f64::INFINITY;
    for w in [4.0, 8.0, 16.0] {
        let xi = Smooth { c: 12.0 + w, w, p: &p };
        let q = quadratic_form_yz(Background::Profile(&p), &xi, &nl, 1, &FormOptions::default()).unwrap().value;
        let (lo, hi) = (12.0, 12.0 + 2.0 * w);
        let n = 64;
        let d = (hi - lo) / n as f64;
        let (mut g, mut l) = (0.0, 0.0);
        for j in 0..n {
            let a = lo + d * j as f64;
            g += gl.integrate(a, a + d, |y| xi.phi(y).1.powi(2));
            l += gl.integrate(a, a + d, |y| xi.phi(y).0.powi(2));
        }
        let k = p.kinetic_integral();
        assert!((q - k * g).abs() < 1e-6 * k * g, "{q} vs {}", k * g);
        let quotient = q / (k * l);
        assert!(quotient > 0.0 && quotient < last);
        last = quotient;
    }
    assert!(last < 0.05);
}

#[test]
fn dilation_scales_asymptotic_functional() {
    let fam = EtaFamily::new(0.05, 100.0, 0.75).unwrap();
    for m in [2usize, 3] {
        let base: f64 = asymptotic_functional(&fam, m);
        for lambda in [2.0, 4.0] {
            let d = asymptotic_functional(&Dilated { inner: fam, lambda }, m);
            let want = base * lambda.powi(-(2 * m as i32 - 3));
            assert!((d - want).abs() < 1e-8 * want.abs(), "m = {m}, lambda = {lambda}");
        }
    }
}

#[test]
fn sweep_at_unit_scale_is_the_direct_form() {
    let nl = ac();
    let p = Profile1D::build_default(&nl).unwrap();
    let fam = EtaFamily::new(0.2, 6.0, 0.75).unwrap();
    let sweep = instability_sweep(&p, &nl, 2, &fam, &[1.0]).unwrap();
    let xi = Separable { eta: &fam, a: 1.0, profile: &p };
    let direct = quadratic_form_yz(Background::Profile(&p), &xi, &nl, 2, &FormOptions::default()).unwrap();
    assert!((sweep.points[0].value - direct.value).abs() < 1e-6 * direct.value.abs().max(1.0));
}

#[test]
fn bent_field_lowers_the_form() {
    let nl = ac();
    let p = Profile1D::build_default(&nl).unwrap();
    let (f, _) = solve(&nl, 2, 16.0, 0.125, &Boundary::Dirichlet, &SolveOptions::default()).unwrap();
    let fam = EtaFamily::new(0.1, 4.0, 0.75).unwrap();
    let xi = Separable { eta: &fam, a: 2.5, profile: &p };
    let opts = FormOptions::default();
    let cm: f64 = wedge_constant(2);
    let q_u = cm * quadratic_form_yz(Background::Field(&f), &xi, &nl, 2, &opts).unwrap().value;
    let q_0 = cm * quadratic_form_yz(Background::Profile(&p), &xi, &nl, 2, &opts).unwrap().value;
    assert!(q_u < 0.0 && q_u <= q_0, "{q_u} vs {q_0}");
    let too_wide = Separable { eta: &fam, a: 4.0, profile: &p };
    assert!(quadratic_form_yz(Background::Field(&f), &too_wide, &nl, 2, &opts).is_err());
}

#[test]
fn nodal_and_wedge_forms_agree() {
    let nl = ac();
    let p = Profile1D::build_default(&nl).unwrap();
    let (f, _) = solve(&nl, 2, 16.0, 0.125, &Boundary::Dirichlet, &SolveOptions::default()).unwrap();
    let xi = Smooth { c: 6.0, w: 4.0, p: &p };
    let nodal: Vec<f64> = f
        .grid()
        .nodes()
        .iter()
        .map(|n| {
            let (y, z) = yz_coords(n.s, n.t);
            if n.class == NodeClass::Arc { 0.0 } else { xi.at(y, z) }
        })
        .collect();
    let q_nodal = nodal_quadratic_form(&reflect_odd(&f), &nl, &nodal).unwrap();
    let cm: f64 = wedge_constant(2);
    let q_yz = cm * quadratic_form_yz(Background::Field(&f), &xi, &nl, 2, &FormOptions::default()).unwrap().value;
    assert!((q_nodal - q_yz).abs() < 5e-3 * q_yz.abs(), "{q_nodal} vs {q_yz}");
}

#[test]
fn wedge_constant_integrates_a_gaussian() {
    // \int_{R^4} exp(-|x|^2) = pi^2
    let gl = GaussLegendre::<f64>::new(20);
    let mut w = 0.0;
    for a in 0..40 {
        let (y0, y1) = (0.2 * a as f64, 0.2 * (a + 1) as f64);
        w += gl.integrate(y0, y1, |y| gl.integrate(-y, y, |z| (y * y - z * z) * (-(y * y + z * z)).exp()));
    }
    let cm: f64 = wedge_constant(2);
    let pi = std::f64::consts::PI;
    assert!((cm * w - pi * pi).abs() < 1e-10);
}

#[test]
fn spectra_on_nested_domains() {
    let nl = ac();
    let solve_at = |r: f64| solve(&nl, 2, r, 0.25, &Boundary::Dirichlet, &SolveOptions::default()).unwrap().0;
    let big = reflect_odd(&solve_at(24.0));
    let opts = SpectrumOptions { k: 2, ..SpectrumOptions::default() };
    let full = linearized_spectrum(&big, &nl, &opts).unwrap();
    let inner =
        linearized_spectrum(&big, &nl, &SpectrumOptions { annulus: Some((0.0, 16.0)), ..opts }).unwrap();
    assert!(inner.report.eigenvalues[0] >= full.report.eigenvalues[0]);
    assert!(full.report.eigenvalues[0] < 0.0);

    let odd = linearized_spectrum(&big, &nl, &SpectrumOptions { class: SymmetryClass::Odd, ..opts }).unwrap();
    assert!(odd.report.eigenvalues[0] > 0.0 && odd.report.morse_count == 0);
}

#[test]
fn annulus_eigenvectors_live_in_their_annulus() {
    let nl = ac();
    let (f, _) = solve(&nl, 2, 16.0, 0.25, &Boundary::Dirichlet, &SolveOptions::default()).unwrap();
    let fld = reflect_odd(&f);
    let grid = fld.grid();
    let mut supports = Vec::new();
    for band in [(0.0, 6.0), (6.0, 12.0)] {
        let sp = linearized_spectrum(&fld, &nl, &SpectrumOptions { k: 1, annulus: Some(band), ..Default::default() })
            .unwrap();
        let v = &sp.vectors[0];
        for (n, x) in grid.nodes().iter().zip(v) {
            let r = (n.s * n.s + n.t * n.t).sqrt();
            if *x != 0.0 {
                assert!(r > band.0 && r < band.1);
            }
        }
        let mass: f64 = v.iter().zip(grid.mass()).map(|(x, w)| x * x * w).sum();
        assert!((mass - 1.0).abs() < 1e-8);
        supports.push(sp.report.supports[0]);
    }
    assert!(supports[0].1 < supports[1].0);
}

#[test]
fn constant_eta_pieces() {
    let eta = PiecewiseLinearEta::new(vec![1.0, 2.0, 3.0], vec![0.0, 1.0, 0.0]).unwrap();
    // triangle hat: \int eta'^2 = 2, m = 1 has no negative part
    let v: f64 = asymptotic_functional(&eta, 1);
    assert!((v - 2.0).abs() < 1e-12);
}
