use parinf::flow::*;
use parinf::mcgehee::k_series;
use parinf::models::*;
use parinf::series::*;
use parinf::shilnikov::*;

fn main() {
    let p = ModelParams::rc3bp(1e-3, 10.0).unwrap();
    let f = KField::new(k_series(&p, Caps::new(10, 8)).unwrap());
    for order in [4usize, 6, 8] {
        match local_manifold_series(&f.series, order) {
            Ok(g) => {
                let res = invariance_residual(&f.series, &g).unwrap();
                println!("order {order}: gmax {:.3e} res@0.01 {:.3e} res@0.005 {:.3e}",
                    g.max_abs(), res.eval(1e-2, 0.0, 0.3).abs(), res.eval(5e-3, 0.0, 0.3).abs());
                for (l, m, k, _, v) in g.iter_coeffs() {
                    if v.abs() > 1e-4 { println!("   g[{l},{m},{k}] = {v:.4e}"); }
                }
            }
            Err(e) => println!("order {order}: ERR {e}"),
        }
    }
    // s* solve trace
    let tail = KTail::default();
    for t in [2000.0f64, 4000.0] {
        match solve_s_star(0.1, 0.1, t, 1e-13, tail) {
            Ok(sol) => println!("T={t}: s* = {:.6} T(s*) = {:.6}", sol.s_star, sol.passage_time()),
            Err(e) => println!("T={t}: ERR {e}  (seed {})", s_star_seed(0.1, 0.1, t)),
        }
    }
}
