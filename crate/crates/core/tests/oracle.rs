use hardykit::conditions::evaluate_scenario;
use hardykit::oracle::{bilinear_best_lower, OracleConfig};
use hardykit::scenario::Scenario;
use hardykit::weights::RadialWeight;

/// E1: n = 1, p1 = p2 = q = 2, u = t^3, v1 = v2 = |x|^3.
fn e1() -> Scenario {
    let w = RadialWeight::power(1.0, 3.0);
    Scenario::bilinear(1, 2.0, 2.0, 2.0, w.clone(), w.clone(), w).unwrap()
}

/// Tail integral `Φ(t) = 2 Σ_j c_j ∫_{cell j, s>t} s^{-3} ds` of the step
/// function `c_j |x|^{-3}` on the cells `[nodes[j], nodes[j+1])`.
fn tail(nodes: &[f64], c: &[f64], t: f64) -> f64 {
    let anti = |a: f64, b: f64| a.powi(-2) - b.powi(-2);
    c.iter()
        .enumerate()
        .map(|(j, cj)| {
            let (a, b) = (nodes[j].max(t), nodes[j + 1]);
            if a < b {
                cj * anti(a, b)
            } else {
                0.0
            }
        })
        .sum()
}

/// `‖c_j |x|^{-3}‖_{2,|x|^3}^2 = 2 Σ c_j^2 ∫ s^{-3}`.
fn norm_sq(nodes: &[f64], c: &[f64]) -> f64 {
    c.iter().enumerate().map(|(j, cj)| cj * cj * (nodes[j].powi(-2) - nodes[j + 1].powi(-2))).sum()
}

/// Simpson in `ln t` on each cell with `panels` panels.
fn lhs_sq(nodes: &[f64], f: &[f64], g: &[f64], panels: usize) -> f64 {
    let t0 = nodes[0];
    let mut s = (tail(nodes, f, t0) * tail(nodes, g, t0)).powi(2) * t0.powi(4) / 4.0;
    let h = |t: f64| (tail(nodes, f, t) * tail(nodes, g, t)).powi(2) * t.powi(4);
    for w in nodes.windows(2) {
        let (la, lb) = (w[0].ln(), w[1].ln());
        let d = (lb - la) / panels as f64;
        let mut acc = h(w[0]) + h(w[1]);
        for k in 1..panels {
            acc += h((la + d * k as f64).exp()) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s += acc * d / 3.0;
    }
    s
}

#[test]
fn argmax_ratio_matches_independent_evaluation() {
    let cfg = OracleConfig { cells: 32, ..OracleConfig::default() };
    let r = bilinear_best_lower(&e1(), &cfg).unwrap();
    let arg = r.argmax.as_ref().unwrap();
    let g = arg.g.as_ref().unwrap();
    let ratio = lhs_sq(&r.nodes, &arg.f, g, 64).sqrt() / (norm_sq(&r.nodes, &arg.f) * norm_sq(&r.nodes, g)).sqrt();
    let l = r.value.get();
    assert!((ratio / l - 1.0).abs() < 1e-3, "oracle {l} independent {ratio}");
    // A lower bound can never exceed what the pair really achieves.
    assert!(l <= ratio * (1.0 + 1e-3));
}

/// `f = g = |x|^{-3} χ_{[1,R]}` gives
/// `LHS^2 = (1 - R^{-2})^4 / 4 + ∫_1^R (t^{-2} - R^{-2})^4 t^3 dt` and
/// `‖f‖^2 = 1 - R^{-2}`; the ratio tends to `1/√2`.
fn shell_ratio(r: f64) -> f64 {
    let e = r.powi(-2);
    let mut inner = 0.0;
    // (t^{-2} - e)^4 t^3 = Σ_k C(4,k) (-e)^k t^{3 - 2(4-k)}
    let binom = [1.0, 4.0, 6.0, 4.0, 1.0];
    for (k, b) in binom.iter().enumerate() {
        let pw = 3.0 - 2.0 * (4 - k) as f64;
        let int = if pw == -1.0 { r.ln() } else { (r.powf(pw + 1.0) - 1.0) / (pw + 1.0) };
        inner += b * (-e).powi(k as i32) * int;
    }
    let lhs = (1.0 - e).powi(4) / 4.0 + inner;
    lhs.sqrt() / (1.0 - e)
}

#[test]
fn e1_best_constant_exceeds_condition_constant() {
    let b = evaluate_scenario(&e1()).constant.get();
    assert!((b - 0.5).abs() < 1e-12);
    let c = shell_ratio(1e4);
    assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6, "{c}");
    assert!(c > b);
    // The same pair evaluated by the independent quadrature agrees.
    let nodes: Vec<f64> = (0..=64).map(|k| 10f64.powf(4.0 * k as f64 / 64.0)).collect();
    let ones = vec![1.0; 64];
    let quad = lhs_sq(&nodes, &ones, &ones, 16).sqrt() / norm_sq(&nodes, &ones);
    assert!((quad / c - 1.0).abs() < 1e-6, "{quad} vs {c}");
}

#[test]
fn oracle_reaches_the_shell_bound() {
    let r = bilinear_best_lower(&e1(), &OracleConfig::default()).unwrap();
    assert!(r.value.get() >= 0.7, "{}", r.value.get());
}
