use mfcd_core::*;
use num_complex::Complex64;
fn main() {
    for s in [0.25, 0.4, 0.6, 0.75] {
    for n in [8usize, 16, 32, 64] {
        let p = ModelParams::new(1.0, 1e-3, n).unwrap();
        let s1 = Schedule::quintic(1.0).unwrap();
        let g = s1.gamma(s, 1.0).unwrap(); let gd = s1.gamma_dot(s, 1.0).unwrap();
        let cd = dynamics::exact_cd(&p, g, gd).unwrap();
        let ops = spin::build_operators(p.spin_size());
        let (_, gs) = dynamics::ground_state_tridiagonal(&spin::assemble_tridiagonal(p.spin_size(), &p, g, 0.0).unwrap()).unwrap();
        let v = nalgebra::DVector::from_vec(gs.amplitudes().to_vec());
        let a = &cd * &v; let b = &ops.sy * &v;
        let gsproj = (b.dotc(&a)).re / (2.0 * b.norm_squared());
        let num = (&cd * &ops.sy).trace().re; let den = (&ops.sy * &ops.sy).trace().re;
        let mf = meanfield::mean_field_point(&p, g, gd).unwrap().theta_dot;
        let _ = Complex64::new(0.0,0.0);
        println!("s={s} N={n} hs={:.6e} gs={:.6e} mf={:.6e} dgs={:.3e}", num/den/2.0, gsproj, mf, (gsproj-mf).abs());
    }}
}
