use okhet::integrator::*;
use okhet::okvf::OkParams;
use okhet::scb::ScbSet;
use okhet::interval::Interval;
use okhet::conv::BackendKind;
use std::time::Instant;

fn main() {
    let m = 15;
    let big_m = 200;
    let mut set = ScbSet::zero(big_m);
    // the exit face: a_3 pinned at +0.075, thin widths from the published block
    set.finite.0[0] = Interval::sym(2.365e-16);
    set.finite.0[1] = Interval::sym(1e-12);
    set.finite.0[2] = Interval::point(0.075);
    set.finite.0[3] = Interval::sym(1.538e-15);
    set.finite.0[4] = Interval::sym(3.038e-16);
    set.finite.0[5] = Interval::sym(1.478e-16);
    set.finite.0[6] = Interval::sym(9.664e-17);
    set.finite.0[7] = Interval::sym(5.623e-17);
    set.finite.0[8] = Interval::sym(5.193e-17);
    set.finite.0[9] = Interval::sym(3.771e-17);
    set.finite.0[10] = Interval::sym(3.332e-17);
    set.finite.0[11] = Interval::sym(2.248e-17);
    set.finite.0[12] = Interval::sym(2.33e-17);
    set.finite.0[13] = Interval::sym(1.926e-17);
    set.finite.0[14] = Interval::sym(1.69e-17);
    for k in 16..=75 { set.finite.0[k-1] = Interval::sym(1e-20); }
    // midzone 76..200 seeded at the tail level
    for k in 76..=big_m {
        set.finite.0[k-1] = Interval::sym(1.393e-46 / (k as f64).powi(6));
    }
    set.tail.c = 1.393e-46;

    let lo = LohnerSet::from_scb(&set, m, big_m);
    let p = OkParams::canonical();
    let mut int = Integrator::new(p, IntegratorCfg::new(0.002, 16, BackendKind::Direct, 32), m, big_m).unwrap();
    let t0 = Instant::now();
    let mut setl = lo;
    for n in 1..=1510usize {
        setl = match int.step(&setl, n) {
            Ok(s) => s,
            Err(e) => { println!("step {n} err: {e}"); return; }
        };
        if n % 250 == 0 || n == 1510 {
            let h = setl.hull();
            println!("step {n} t={:.3} [{:?}] a3={:?} w3={:.2e} a9={:?} tail={:.2e} ({:.1?})",
                n as f64*0.002, t0.elapsed(), h.0[2], h.0[2].width(), h.0[8], setl.tail.c, t0.elapsed());
        }
    }
    let h = setl.hull();
    for k in 1..=15 { println!("mode {k}: {:?}", h.0[k-1]); }
    println!("mid 16..24: {:?}", &setl.midzone[0..9].iter().map(|x| x.max_abs()).collect::<Vec<_>>());
    println!("mid 40 45 100 200: {:?}", [setl.midzone[24], setl.midzone[29], setl.midzone[84], setl.midzone[184]].map(|x| x.max_abs()));
}
