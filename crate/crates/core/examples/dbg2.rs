use okhet::profile::MagProfile;
fn main() {
    // profile shaped like the fat state at t ~ 0.94
    let big_m = 200;
    let mut fin = vec![0.0f64; big_m];
    fin[0] = 1.1e-15; fin[1] = 2.0e-12; fin[2] = 0.271; fin[3] = 8.0e-13;
    fin[4] = 1.1e-15; fin[5] = 1.2e-15; fin[8] = 4.0e-3; fin[14] = 8.0e-5;
    // slaved chain decaying by ~2e-4 per 6 indices beyond 15
    let mut level: f64 = 8.0e-5;
    for k in 16..=big_m {
        if (k - 3) % 6 == 0 || k % 3 == 0 {
            level = 8.0e-5 * (2e-4f64).powf(((k as f64) - 15.0) / 6.0);
        }
        fin[k - 1] = level.max(1.473e-46 / (k as f64).powi(6));
    }
    let p = MagProfile { fin, tail_c: 1.473e-46 };
    let k3 = p.cube_tail_majorant(big_m);
    println!("k3 = {k3:e}, c_abs-ish = {:e}", k3 * 4.0e-4);
}
