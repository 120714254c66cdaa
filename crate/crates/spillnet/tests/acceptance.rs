//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Criteria 3 (rejection-rate sub-check) and 5 are known to fail:
//! with the bandwidth fixed at M = 5 the causality statistic's null law is
//! a centered weighted chi-square with about 2.5 effective degrees of
//! freedom, not a normal, so one-sided normal p-values over-reject - by a
//! factor of about 1.4 at the 5% level and by two orders of magnitude at
//! Bonferroni-far-tail levels. Both tests implement their stated checks
//! verbatim and report the measured rates.

use chrono::{Datelike, Duration, NaiveDate, NaiveTime};
use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use spillnet::calendar::{
    align_pair, Classification, CloseChange, MarketSpec, PriceSeries, TzRule,
};
use spillnet::causality::{bonferroni_level, q_statistic, CausalityConfig};
use spillnet::garch::{
    fit_model, FitConfig, GarchFamily, JohnsonSuParams, JsuStd, ModelOrders,
};
use spillnet::network::{
    degree_centralization, degrees, harmonic_centrality, mean_degree_centrality, survival_ratio,
    Direction, SpilloverNetwork,
};
use spillnet::probit::{build_weights, fit_sar_probit, fit_standard_probit, SamplerConfig};
use spillnet::seeding::rng_for;
use spillnet::stats::{mean, median, normal_quantile, variance};
use spillnet::windows::{enumerate_windows, Month};
use std::time::Instant;

fn report(criterion: u32, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("[criterion {criterion:02}] {status} - {detail}");
}

fn d(y: i32, m: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, day).unwrap()
}

fn plain_market(id: &str, close_h: u32, close_m: u32) -> MarketSpec {
    MarketSpec {
        id: id.into(),
        name: id.into(),
        classification: Classification::Developed,
        tz_rules: (2000..=2020)
            .map(|year| TzRule {
                year,
                std_offset_minutes: 0,
                dst_start: None,
                dst_end: None,
                dst_offset_minutes: None,
            })
            .collect(),
        close_schedule: vec![CloseChange {
            effective: d(2000, 1, 1),
            close: NaiveTime::from_hms_opt(close_h, close_m, 0).unwrap(),
        }],
    }
}

fn weekdays(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::new();
    let mut cur = start;
    while out.len() < n {
        match cur.weekday() {
            chrono::Weekday::Sat | chrono::Weekday::Sun => {}
            _ => out.push(cur),
        }
        cur += Duration::days(1);
    }
    out
}

fn gaussian(n: usize, label: &str) -> Vec<f64> {
    let mut rng = rng_for(2024, label);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

// ---------------------------------------------------------------------
// criterion 1: alignment golden tests
// ---------------------------------------------------------------------
#[test]
fn criterion_01_alignment_golden() {
    let start = Instant::now();
    let dates = weekdays(d(2006, 1, 2), 8);
    let prices = |seed: f64| -> Vec<(NaiveDate, f64)> {
        dates
            .iter()
            .enumerate()
            .map(|(i, dt)| (*dt, 100.0 + seed * (i as f64 + 1.0)))
            .collect()
    };
    let p_out = PriceSeries::new("OUT", prices(1.0)).unwrap();
    let p_in = PriceSeries::new("IN", prices(2.0)).unwrap();
    let out_returns: Vec<f64> = prices(1.0)
        .windows(2)
        .map(|w| (w[1].1 / w[0].1).ln())
        .collect();

    // out closes 16:00, in closes 15:00: lagged pairing (out at t-1, in at t)
    let late = plain_market("OUT", 16, 0);
    let early_in = plain_market("IN", 15, 0);
    let ap = align_pair(&p_out, &p_in, &late, &early_in).unwrap();
    assert_eq!(ap.k_start, 1);
    // the lag-1 term of the test pairs in[t] with r_out[t-1], which must be
    // the out return of the previous date
    for t in 1..ap.len() {
        assert_eq!(ap.r_out[t - 1], out_returns[t - 1]);
    }

    // out closes 16:00, in closes 17:00: same-day pairing (out at t, in at t)
    let late_in = plain_market("IN", 17, 0);
    let ap = align_pair(&p_out, &p_in, &late, &late_in).unwrap();
    assert_eq!(ap.k_start, 1);
    for t in 1..ap.len() {
        assert_eq!(ap.r_out[t - 1], out_returns[t]);
    }

    // identical closes: contemporaneous lag admitted
    let same_in = plain_market("IN", 16, 0);
    let ap = align_pair(&p_out, &p_in, &late, &same_in).unwrap();
    assert_eq!(ap.k_start, 0);
    assert!(ap.k_min.iter().all(|&k| k == 0));

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    report(1, true, &format!("three worked alignment examples exact in {elapsed:?}"));
}

// ---------------------------------------------------------------------
// criterion 2: combinatorial anchors
// ---------------------------------------------------------------------
#[test]
fn criterion_02_combinatorial_anchors() {
    let n = 40;
    let pairs = n * (n - 1);
    assert_eq!(pairs, 1560);
    let level = bonferroni_level(n, 0.01);
    assert_eq!(level, 0.01 / 1560.0);
    let windows = enumerate_windows(d(2006, 1, 2), d(2014, 12, 31), 12, 1);
    assert_eq!(windows.len(), 97);
    assert_eq!(windows[0].end, Month::new(2006, 12));
    assert_eq!(windows[96].end, Month::new(2014, 12));
    report(2, true, "1560 ordered pairs, level 0.01/1560, 97 windows");
}

// ---------------------------------------------------------------------
// criterion 3: null calibration of the causality statistic
// ---------------------------------------------------------------------
#[test]
fn criterion_03_null_calibration() {
    let start = Instant::now();
    let cfg = CausalityConfig::default();
    let reps = 2000;
    let t = 250;
    let mut qs = Vec::with_capacity(reps);
    for i in 0..reps {
        let a = gaussian(t, &format!("c3-a-{i}"));
        let b = gaussian(t, &format!("c3-b-{i}"));
        let (q, _) = q_statistic(&a, &b, &cfg, 1).unwrap();
        qs.push(q);
    }
    let m = mean(&qs);
    let v = variance(&qs);
    let crit = normal_quantile(0.95);
    let rejection = qs.iter().filter(|&&q| q > crit).count() as f64 / reps as f64;
    let band = 2.576 * (0.05f64 * 0.95 / reps as f64).sqrt();
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");

    let mean_ok = (-0.1..=0.1).contains(&m);
    let var_ok = (0.8..=1.2).contains(&v);
    let rej_ok = (rejection - 0.05).abs() < band;
    report(
        3,
        mean_ok && var_ok && rej_ok,
        &format!(
            "mean {m:.4} (need [-0.1,0.1]), var {v:.4} (need [0.8,1.2]), \
             rejection {rejection:.4} (band 0.05 +- {band:.4}), {elapsed:?}"
        ),
    );
    assert!(mean_ok, "mean(Q) = {m}");
    assert!(var_ok, "var(Q) = {v}");
    // Known red: with M fixed at 5 the null law of Q is a centered weighted
    // chi-square (Bartlett weights w^2 = .64/.36/.16/.04, ~2.5 effective
    // dof); its 5% upper tail under normal critical values is ~7%, outside
    // the binomial band by construction. The check is asserted as stated.
    assert!(
        rej_ok,
        "one-sided 5% rejection rate {rejection:.4} outside [{:.4}, {:.4}]: \
         fixed-bandwidth kernel statistic is weighted-chi-square under the \
         null, so normal critical values over-reject",
        0.05 - band,
        0.05 + band
    );
}

// ---------------------------------------------------------------------
// criterion 4: oracle equivalence of the streaming statistic
// ---------------------------------------------------------------------
#[test]
fn criterion_04_oracle_equivalence() {
    fn bartlett(z: f64) -> f64 {
        if z.abs() < 1.0 {
            1.0 - z.abs()
        } else {
            0.0
        }
    }
    // naive double-loop evaluation straight from the printed sums
    fn q_naive(s_out: &[f64], s_in: &[f64], m: usize, k_start: u8) -> f64 {
        let t = s_in.len();
        let tf = t as f64;
        let c_in: f64 = s_in.iter().map(|v| v * v).sum::<f64>() / tf;
        let c_out: f64 = s_out.iter().map(|v| v * v).sum::<f64>() / tf;
        let rho = |k: usize| -> f64 {
            let mut acc = 0.0;
            for tt in k..t {
                acc += s_in[tt] * s_out[tt - k];
            }
            acc / tf / (c_in * c_out).sqrt()
        };
        let k_hi = if k_start == 0 { t - 2 } else { t - 1 };
        let mut outer = 0.0;
        for k in (k_start as usize)..=k_hi {
            let w = bartlett(k as f64 / m as f64);
            outer += w * w * rho(k).powi(2);
        }
        let mut centering = 0.0;
        let mut scaling = 0.0;
        for k in 1..t {
            let w = bartlett(k as f64 / m as f64);
            centering += (1.0 - k as f64 / tf) * w.powi(2);
            scaling += 2.0 * (1.0 - k as f64 / tf) * (1.0 - (k as f64 + 1.0) / tf) * w.powi(4);
        }
        (tf * outer - centering) / scaling.sqrt()
    }

    let cfg = CausalityConfig::default();
    let mut max_err = 0.0f64;
    for i in 0..100 {
        let n = 30 + (i * 13) % 400;
        let a = gaussian(n, &format!("c4-a-{i}"));
        let b = gaussian(n, &format!("c4-b-{i}"));
        for k_start in [0u8, 1] {
            let (q, _) = q_statistic(&a, &b, &cfg, k_start).unwrap();
            let naive = q_naive(&a, &b, cfg.bandwidth, k_start);
            max_err = max_err.max((q - naive).abs());
        }
    }
    let pass = max_err < 1e-10;
    report(4, pass, &format!("max |streaming - naive| = {max_err:.2e} over 100 inputs"));
    assert!(pass, "max error {max_err}");
}

// ---------------------------------------------------------------------
// criterion 5: family-wise error in a null world
// ---------------------------------------------------------------------
#[test]
fn criterion_05_familywise_error() {
    use spillnet::pipeline::{run, RunConfig, Stage};
    let start = Instant::now();
    let dir = tempfile::TempDir::new().unwrap();
    let mut markets = String::new();
    for i in 0..10 {
        let close_h = 2 * i + 2; // closes spread over the day
        markets.push_str(&format!(
            r#"
[[world.markets]]
id = "M{i:02}"
classification = "{}"
std_offset_minutes = 0
close = "{close_h:02}:00"
holidays_per_year = 2
garch_omega = 4e-6
garch_alpha = 0.08
garch_beta = 0.88
jsu_lambda = -0.3
jsu_zeta = 0.5
mu = 0.0002
"#,
            ["developed", "emerging", "frontier"][i % 3]
        ));
    }
    let text = format!(
        r#"
[paths]
registry = "data/registry.toml"
prices = "data/prices.csv"
covariates = "data/covariates.csv"
output = "."

[filter]
families = ["garch"]
scope = "global"
starts = 2
pr_reps = 200

[run]
seed = 505

[world]
start_date = "2006-01-02"
n_weekdays = 2400
seed = 505
{markets}
"#
    );
    let cfg_path = dir.path().join("null.toml");
    std::fs::write(&cfg_path, text).unwrap();
    let cfg = RunConfig::load(&cfg_path).unwrap();
    run(&cfg, &[Stage::Synth, Stage::Filter, Stage::Network]).unwrap();
    let records: Vec<spillnet::pipeline::io::NetworkRecord> =
        spillnet::pipeline::io::read_jsonl(&dir.path().join("networks.jsonl")).unwrap();
    let n_windows = records.len();
    assert!(
        (99..=101).contains(&n_windows),
        "expected about 100 windows, got {n_windows}"
    );
    let total_false: usize = records.iter().take(100).map(|r| r.edges.len()).sum();
    let elapsed = start.elapsed();
    let time_ok = elapsed.as_secs_f64() < 300.0;
    let pass = total_false <= 5 && time_ok;
    report(
        5,
        pass,
        &format!(
            "{total_false} false edges over {} null windows (need <= 5), {elapsed:?}",
            n_windows.min(100)
        ),
    );
    assert!(time_ok, "took {elapsed:?}");
    // Known red, same root cause as criterion 3: at the Bonferroni level
    // 0.01/90 the normal tail says 1.1e-4 per test, but the fixed-bandwidth
    // statistic's true upper tail there is ~1e-2, so ~90-130 false edges
    // accumulate instead of <= 5.
    assert!(
        total_false <= 5,
        "{total_false} false edges > 5: fixed-bandwidth kernel statistic \
         over-rejects at far-tail normal critical values (weighted \
         chi-square null law); nominal Bonferroni arithmetic does not hold"
    );
}

// ---------------------------------------------------------------------
// criterion 6: power against a planted lag-1 spillover
// ---------------------------------------------------------------------
#[test]
fn criterion_06_power() {
    let cfg = CausalityConfig::default();
    let seeds = 200;
    let t = 250;
    let mut detected = 0;
    for i in 0..seeds {
        let driver = gaussian(t + 1, &format!("c6-d-{i}"));
        let noise = gaussian(t, &format!("c6-n-{i}"));
        let s_out: Vec<f64> = driver[1..].to_vec();
        let s_in: Vec<f64> = (0..t)
            .map(|k| if k >= 1 { 0.3 * s_out[k - 1] } else { 0.0 } + noise[k])
            .collect();
        let (_, p) = q_statistic(&s_out, &s_in, &cfg, 1).unwrap();
        if p < 0.05 {
            detected += 1;
        }
    }
    let rate = detected as f64 / seeds as f64;
    let pass = rate > 0.95;
    report(6, pass, &format!("detected {detected}/{seeds} ({rate:.3}, need > 0.95)"));
    assert!(pass, "power {rate}");
}

// ---------------------------------------------------------------------
// criterion 7: GARCH recovery and Johnson-SU normalization
// ---------------------------------------------------------------------
#[test]
fn criterion_07_garch_recovery() {
    // density normalization by quadrature in asinh space
    let p = JohnsonSuParams::new(-0.4, 0.8).unwrap();
    let st = JsuStd::new(&p).unwrap();
    let (a, b, n) = (p.lambda - 12.0 * p.zeta, p.lambda + 12.0 * p.zeta, 4000usize);
    let h = (b - a) / n as f64;
    let f = |u: f64| {
        let x = u.sinh();
        let y = (x - st.mean_raw()) / st.sd_raw();
        st.logpdf(y).exp() * u.cosh() / st.sd_raw()
    };
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    let integral = acc * h / 3.0;
    let norm_ok = (integral - 1.0).abs() < 1e-8;

    // simulation recovery: GARCH(1,1) with near-normal innovations
    let truth = (0.05, 0.10, 0.85);
    let dist = JohnsonSuParams::new(0.0, 0.2).unwrap();
    let jsu = JsuStd::new(&dist).unwrap();
    let orders = ModelOrders {
        p: 0,
        q: 0,
        d_free: false,
        family: GarchFamily::Garch,
        r: 1,
        s: 1,
    };
    let fit_cfg = FitConfig {
        starts: 3,
        ..FitConfig::default()
    };
    let mut errs = (Vec::new(), Vec::new(), Vec::new());
    for seed in 0..20 {
        let mut rng = rng_for(7, &format!("c7-{seed}"));
        let mut sigma2: f64 = truth.0 / (1.0 - truth.1 - truth.2);
        let mut r = Vec::with_capacity(2000);
        for _ in 0..2200 {
            let e = sigma2.sqrt() * jsu.sample(&mut rng);
            r.push(e);
            sigma2 = truth.0 + truth.1 * e * e + truth.2 * sigma2;
        }
        let r = r.split_off(200);
        let fit = fit_model(&r, orders, &fit_cfg).unwrap();
        errs.0.push((fit.garch.omega - truth.0).abs());
        errs.1.push((fit.garch.alpha[0] - truth.1).abs());
        errs.2.push((fit.garch.beta[0] - truth.2).abs());
    }
    let med = (median(&errs.0), median(&errs.1), median(&errs.2));
    let rec_ok = med.0 <= 0.05 && med.1 <= 0.05 && med.2 <= 0.05;
    let pass = norm_ok && rec_ok;
    report(
        7,
        pass,
        &format!(
            "median |err| (omega,alpha,beta) = ({:.4},{:.4},{:.4}) need <= 0.05; \
             |integral - 1| = {:.1e} need < 1e-8",
            med.0,
            med.1,
            med.2,
            (integral - 1.0).abs()
        ),
    );
    assert!(norm_ok, "normalization error {:.2e}", (integral - 1.0).abs());
    assert!(rec_ok, "median errors {med:?}");
}

// ---------------------------------------------------------------------
// criterion 8: graph-metric oracles
// ---------------------------------------------------------------------
#[test]
fn criterion_08_graph_oracles() {
    use rand::Rng;
    // star anchor
    let mut star = SpilloverNetwork::new(
        Month::new(2006, 12),
        (0..40).map(|i| format!("M{i:02}")).collect(),
    );
    for i in 1..40 {
        star.add_edge(0, i);
    }
    let h = harmonic_centrality(&star, Direction::Out);
    assert_eq!(h[0], 39.0);

    let mut checked = 0;
    for trial in 0..50 {
        let n = 3 + trial % 8;
        let mut rng = rng_for(8, &format!("c8-{trial}"));
        let mut g = SpilloverNetwork::new(
            Month::new(2006, 12),
            (0..n).map(|i| format!("M{i:02}")).collect(),
        );
        let mut adjacency = vec![vec![0usize; n]; n];
        for o in 0..n {
            for i in 0..n {
                if o != i && rng.random::<f64>() < 0.35 {
                    g.add_edge(o, i);
                    adjacency[o][i] = 1;
                }
            }
        }
        // degrees against adjacency-matrix sums
        let (out, in_) = degrees(&g);
        for v in 0..n {
            assert_eq!(out[v], adjacency[v].iter().sum::<usize>());
            assert_eq!(in_[v], (0..n).map(|u| adjacency[u][v]).sum::<usize>());
        }
        // harmonic against Floyd-Warshall
        const INF: usize = usize::MAX / 4;
        let mut dist = vec![vec![INF; n]; n];
        for v in 0..n {
            dist[v][v] = 0;
        }
        for o in 0..n {
            for i in 0..n {
                if adjacency[o][i] == 1 {
                    dist[o][i] = 1;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if dist[i][k] + dist[k][j] < dist[i][j] {
                        dist[i][j] = dist[i][k] + dist[k][j];
                    }
                }
            }
        }
        let ours = harmonic_centrality(&g, Direction::Out);
        for i in 0..n {
            let oracle: f64 = (0..n)
                .filter(|&j| j != i && dist[i][j] < INF)
                .map(|j| 1.0 / dist[i][j] as f64)
                .sum();
            assert_eq!(ours[i], oracle, "harmonic mismatch");
        }
        // centralizations against the direct formula
        for direction in [Direction::Out, Direction::In] {
            let deg = match direction {
                Direction::Out => &out,
                Direction::In => &in_,
            };
            let mx = *deg.iter().max().unwrap();
            let oracle: f64 = deg.iter().map(|&dv| (mx - dv) as f64).sum::<f64>()
                / ((n - 2) * (n - 1)) as f64;
            assert_eq!(degree_centralization(&g, direction), oracle);
        }
        // density identity
        assert_eq!(
            mean_degree_centrality(&g),
            g.n_edges() as f64 / (n * (n - 1)) as f64
        );
        checked += 1;
    }
    // survival ratios against a set-operations oracle on random sequences
    for trial in 0..10 {
        let n = 6;
        let mut rng = rng_for(88, &format!("c8-s-{trial}"));
        let nets: Vec<SpilloverNetwork> = (0..5)
            .map(|w| {
                let mut g = SpilloverNetwork::new(
                    Month::new(2006, 12 + 0).plus(w),
                    (0..n).map(|i| format!("M{i:02}")).collect(),
                );
                for o in 0..n {
                    for i in 0..n {
                        if o != i && rng.random::<f64>() < 0.4 {
                            g.add_edge(o, i);
                        }
                    }
                }
                g
            })
            .collect();
        for t in 1..5usize {
            for s in 1..=t {
                let base: std::collections::BTreeSet<_> = nets[t - s].edge_ids();
                if base.is_empty() {
                    continue;
                }
                let mut inter = base.clone();
                for u in (t - s + 1)..=t {
                    let ids = nets[u].edge_ids();
                    inter.retain(|e| ids.contains(e));
                }
                let oracle = inter.len() as f64 / base.len() as f64;
                assert_eq!(survival_ratio(&nets, t, s).unwrap(), oracle);
            }
        }
    }
    report(8, true, &format!("{checked} random graphs match brute-force oracles; star anchor 39"));
}

// ---------------------------------------------------------------------
// criterion 9: spatial probit
// ---------------------------------------------------------------------
#[test]
fn criterion_09_spatial_probit() {
    let start = Instant::now();
    // weight-matrix anchors
    for n in [10usize, 20, 40] {
        let w = build_weights(n).unwrap();
        let dense = w.dense();
        for row in 0..w.n_pairs() {
            let sum: f64 = dense.row(row).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            let nonzeros = dense.row(row).iter().filter(|v| **v != 0.0).count();
            assert_eq!(nonzeros, 2 * (n - 2));
        }
    }

    let w = build_weights(20).unwrap();
    // x2 is a spatially smoothed field (W applied to noise), which keeps
    // the latent mean informative about rho; the others are iid
    let truth = [0.1, 0.8, 2.4, 0.8];
    let names: Vec<String> = ["intercept", "x1", "x2", "x3"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let simulate = |rho: f64, label: &str| -> (Vec<f64>, DMatrix<f64>) {
        let n = w.n_pairs();
        let mut rng = rng_for(9, label);
        let mut x = DMatrix::<f64>::zeros(n, truth.len());
        let u: Vec<f64> = (0..n)
            .map(|_| {
                let g: f64 = StandardNormal.sample(&mut rng);
                g
            })
            .collect();
        let mut wu = vec![0.0; n];
        w.matvec(&u, &mut wu);
        let mu_wu = mean(&wu);
        let sd_wu = variance(&wu).sqrt();
        for r in 0..n {
            x[(r, 0)] = 1.0;
            for c in 1..truth.len() {
                x[(r, c)] = if c == 2 {
                    (wu[r] - mu_wu) / sd_wu
                } else {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    g
                };
            }
        }
        let betav = DVector::from_column_slice(&truth);
        let eps = DVector::from_iterator(n, (0..n).map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            g
        }));
        let rhs = x.clone() * betav + eps;
        let a = DMatrix::<f64>::identity(n, n) - w.dense() * rho;
        let y_star = a.lu().solve(&rhs).unwrap();
        let y: Vec<f64> = y_star
            .iter()
            .map(|&v| if v >= 0.0 { 1.0 } else { 0.0 })
            .collect();
        (y, x)
    };

    let cfg = SamplerConfig {
        draws: 1200,
        burn_in: 300,
        ..SamplerConfig::default()
    };
    // rho = 0: beta within 3 posterior sd and consistent with the MLE oracle
    let mut beta_misses = 0;
    let mut mle_ok = true;
    for seed in 0..20 {
        let (y, x) = simulate(0.0, &format!("c9-rho0-{seed}"));
        let mut rng = rng_for(90 + seed, "c9-chain");
        let fit = fit_sar_probit(&y, &x, &names, &w, &cfg, &mut rng).unwrap();
        for j in 0..truth.len() {
            if (fit.beta_mean[j] - truth[j]).abs() > 3.0 * fit.beta_sd[j] {
                beta_misses += 1;
            }
        }
        let fixed = SamplerConfig {
            fix_rho: Some(0.0),
            ..cfg.clone()
        };
        let mut rng = rng_for(190 + seed, "c9-fixed-chain");
        let pinned = fit_sar_probit(&y, &x, &names, &w, &fixed, &mut rng).unwrap();
        let mle = fit_standard_probit(&y, &x, &names).unwrap();
        for j in 0..truth.len() {
            if (pinned.beta_mean[j] - mle.coef[j]).abs() > 2.0 * mle.se[j] {
                mle_ok = false;
            }
        }
    }
    // 3-posterior-sd misses are ~0.3% events; tolerate a couple out of 80
    let beta_ok = beta_misses <= 3;

    // rho = 0.5: median posterior-mean error over 20 seeds
    let mut errors = Vec::new();
    for seed in 0..20 {
        let (y, x) = simulate(0.5, &format!("c9-rho5-{seed}"));
        let mut rng = rng_for(290 + seed, "c9-rho5-chain");
        let fit = fit_sar_probit(&y, &x, &names, &w, &cfg, &mut rng).unwrap();
        errors.push((fit.rho_mean - 0.5).abs());
    }
    let med = median(&errors);
    let rho_ok = med <= 0.15;
    let elapsed = start.elapsed();
    let time_ok = elapsed.as_secs_f64() < 600.0;
    let pass = beta_ok && mle_ok && rho_ok && time_ok;
    report(
        9,
        pass,
        &format!(
            "row sums/nonzeros exact; {beta_misses}/80 beta draws beyond 3 sd; \
             MLE-consistent: {mle_ok}; median |rho err| {med:.3} (need <= 0.15); {elapsed:?}"
        ),
    );
    assert!(beta_ok, "{beta_misses} beta misses");
    assert!(mle_ok, "Gibbs posterior disagrees with probit MLE");
    assert!(rho_ok, "median rho error {med}");
    assert!(time_ok, "took {elapsed:?}");
}

// ---------------------------------------------------------------------
// criterion 10: end-to-end on the bundled six-market world
// ---------------------------------------------------------------------
#[test]
fn criterion_10_end_to_end() {
    use spillnet::pipeline::{run, RunConfig, Stage};
    let start = Instant::now();
    let demo_path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .ancestors()
        .nth(2)
        .unwrap()
        .join("demo/demo.toml");
    let run_once = |out_label: &str| -> (tempfile::TempDir, RunConfig) {
        let dir = tempfile::TempDir::new().unwrap();
        let mut cfg = RunConfig::load(&demo_path).unwrap();
        let base = dir.path().join(out_label);
        cfg.paths.registry = base.join("data/registry.toml");
        cfg.paths.prices = base.join("data/prices.csv");
        cfg.paths.covariates = base.join("data/covariates.csv");
        cfg.paths.output = base.clone();
        run(
            &cfg,
            &[
                Stage::Synth,
                Stage::Filter,
                Stage::Network,
                Stage::Metrics,
                Stage::Probit,
                Stage::Report,
            ],
        )
        .unwrap();
        (dir, cfg)
    };
    let (dir_a, _cfg) = run_once("a");
    let first_elapsed = start.elapsed();

    // deterministic on reseed: a fresh run with the same seed is
    // byte-identical on every numerical artifact
    let (dir_b, _) = run_once("b");
    for artifact in [
        "data/prices.csv",
        "data/covariates.csv",
        "residuals/global.csv",
        "fits.jsonl",
        "networks.jsonl",
        "vertex_metrics.csv",
        "network_metrics.csv",
        "survival.csv",
        "centrality_trends.csv",
        "probit_windows.csv",
        "probit_summary.csv",
        "report/centralization_series.csv",
        "report/degree_correlation_series.csv",
        "report/survival_curves.csv",
        "report/centrality_trends.csv",
        "report/probit_summary.csv",
    ] {
        let a = std::fs::read(dir_a.path().join("a").join(artifact)).unwrap();
        let b = std::fs::read(dir_b.path().join("b").join(artifact)).unwrap();
        assert_eq!(a, b, "artifact {artifact} not byte-identical");
    }

    // recovery against the planted truth
    let records: Vec<spillnet::pipeline::io::NetworkRecord> =
        spillnet::pipeline::io::read_jsonl(&dir_a.path().join("a/networks.jsonl")).unwrap();
    let networks: Vec<_> = records.iter().map(|r| r.to_network()).collect();
    let truth: spillnet::synth::WorldTruth =
        spillnet::pipeline::io::read_json(&dir_a.path().join("a/truth.json")).unwrap();
    let score = spillnet::synth::recovery_score(&networks, &truth.edges);
    let precision = score.pooled.precision.unwrap_or(0.0);
    let recall = score.pooled.recall;

    // temporal-distance coefficient negative and significant per window
    let text = std::fs::read_to_string(dir_a.path().join("a/probit_windows.csv")).unwrap();
    let mut neg_sig = 0;
    let mut n_windows = 0;
    for line in text.lines().skip(2) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() >= 7 && cells[1] == "temporal_distance" {
            n_windows += 1;
            let mean_v: f64 = cells[2].parse().unwrap();
            let significant: bool = cells[6].parse().unwrap();
            if mean_v < 0.0 && significant {
                neg_sig += 1;
            }
        }
    }
    let frac = neg_sig as f64 / n_windows.max(1) as f64;

    let elapsed = start.elapsed();
    let time_ok = first_elapsed.as_secs_f64() < 600.0;
    let rec_ok = precision >= 0.9 && recall >= 0.9;
    let probit_ok = frac >= 0.9;
    let pass = time_ok && rec_ok && probit_ok;
    report(
        10,
        pass,
        &format!(
            "run {first_elapsed:?} (need < 10 min); byte-identical on reseed; \
             pooled precision {precision:.3} recall {recall:.3} (need >= 0.9); \
             temporal distance negative+significant in {neg_sig}/{n_windows} windows \
             (need >= 0.9); total {elapsed:?}"
        ),
    );
    assert!(time_ok, "first run took {first_elapsed:?}");
    assert!(rec_ok, "precision {precision}, recall {recall}");
    assert!(probit_ok, "temporal distance negative+significant in {neg_sig}/{n_windows}");
}
