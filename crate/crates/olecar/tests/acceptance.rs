//! Acceptance suite. Runs every criterion, prints one line each, and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use olecar::config::{CacheSimConfig, PolicyChoice, RunConfig, TraceInput};
use olecar::report::{read_config_echo, Format};
use olecar::run::{cache_sim, run};
use olecar_core::bandit::{
    estimate_cost, mix_advice, optimal_learning_rate, optimal_regret_bound, ActionDistribution, AdviceMatrix,
    DelayedFeedback, EstimatorOptions, WeightState,
};
use olecar_core::cache::{Access, CacheState, Policy};
use olecar_core::engine::legacy_cost;
use olecar_core::harness::{run_experiment, BanditExperiment, EnvSpec, ExperimentReport};
use olecar_core::rng::DetRng;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    check: fn() -> Outcome,
}

fn ensure(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn distribution_invariants() -> Outcome {
    let mut rng = DetRng::new(1);
    let mut worst_sum = 0.0f64;
    let mut worst_floor = f64::INFINITY;
    for _ in 0..10_000 {
        let n = 1 + rng.below(8) as usize;
        let k = 1 + rng.below(12) as usize;
        let eta = 1.0 - rng.next_f64();
        let weights: Vec<f64> = (0..n).map(|_| (rng.next_f64() * 200.0 - 100.0).exp()).collect();
        let mut data = Vec::with_capacity(n * k);
        for _ in 0..n {
            if rng.below(2) == 0 {
                let a = rng.below(k as u64) as usize;
                data.extend((0..k).map(|j| if j == a { 1.0 } else { 0.0 }));
            } else {
                let raw: Vec<f64> = (0..k).map(|_| rng.next_f64() + 1e-12).collect();
                let total: f64 = raw.iter().sum();
                data.extend(raw.iter().map(|x| x / total));
            }
        }
        let advice = AdviceMatrix::new(n, k, data).map_err(|e| e.to_string())?;
        let p = mix_advice(&weights, eta, &advice).map_err(|e| e.to_string())?;
        let sum: f64 = p.probs().iter().sum();
        worst_sum = worst_sum.max((sum - 1.0).abs());
        let floor = eta / k as f64;
        for &q in p.probs() {
            worst_floor = worst_floor.min(q - (floor - 1e-12));
        }
    }
    ensure(
        worst_sum <= 1e-9 && worst_floor >= 0.0,
        format!("max |sum - 1| = {worst_sum:.2e}, min slack over floor = {worst_floor:.2e}"),
    )
}

fn estimator_unbiased() -> Outcome {
    let probs = vec![0.3, 0.1, 0.2, 0.25, 0.15];
    let dist = ActionDistribution::new(probs.clone()).map_err(|e| e.to_string())?;
    let (x, d, m) = (0.8, 4, 4);
    let draws = 1_000_000u32;
    let mut rng = DetRng::new(77);
    let mut sum = 0.0;
    for _ in 0..draws {
        let a = dist.sample(&mut rng);
        let fb = DelayedFeedback {
            action: a,
            raw_cost: x,
            delay: d,
            threshold: m,
            acting_prob: probs[a],
        };
        sum += estimate_cost(&fb, 5, EstimatorOptions::IMPORTANCE_WEIGHTED)
            .map_err(|e| e.to_string())?
            .get(0);
    }
    let mean = sum / f64::from(draws);
    let target = x / d as f64;
    let p = probs[0];
    let three_sigma = 3.0 * target * ((1.0 - p) / p).sqrt() / f64::from(draws).sqrt();
    ensure(
        (mean - target).abs() <= three_sigma,
        format!("mean {mean:.6} vs {target}, 3 sigma {three_sigma:.6}"),
    )
}

fn regret_experiment(horizon: u64) -> Result<ExperimentReport, String> {
    let mut means = vec![0.5; 10];
    means[0] = 0.1;
    let exp = BanditExperiment::new(EnvSpec::stochastic(means, 20), 4, horizon);
    let seeds: Vec<u64> = (0..20).collect();
    run_experiment(&exp, &seeds).map_err(|e| e.to_string())
}

fn regret_bound_holds() -> Outcome {
    let r = regret_experiment(50_000)?;
    let final_bound = optimal_regret_bound(10, 4, 50_000);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_round = 0;
    for p in &r.curve {
        let excess = p.mean + 2.0 * p.std_err - optimal_regret_bound(10, 4, p.round);
        if excess > worst {
            worst = excess;
            worst_round = p.round;
        }
    }
    ensure(
        r.mean_regret + 2.0 * r.std_err <= final_bound && worst <= 0.0,
        format!(
            "mean regret {:.1} (+2se {:.1}) vs bound {final_bound:.1}; closest prefix t={worst_round} at {worst:.1} from its bound",
            r.mean_regret,
            2.0 * r.std_err
        ),
    )
}

fn sublinear() -> Outcome {
    let a = regret_experiment(50_000)?;
    let b = regret_experiment(100_000)?;
    let ratio = b.mean_regret / a.mean_regret;
    ensure(
        ratio < 1.9,
        format!("R(2T)/R(T) = {:.1}/{:.1} = {ratio:.3}", b.mean_regret, a.mean_regret),
    )
}

fn weights_converge() -> Outcome {
    let advice = AdviceMatrix::one_hot(2, &[0, 1]).map_err(|e| e.to_string())?;
    let mut state = WeightState::new(2, 2, 0.1).map_err(|e| e.to_string())?;
    let mut rng = DetRng::new(5);
    for _ in 0..5000 {
        let dist = state.action_distribution(&advice).map_err(|e| e.to_string())?;
        let a = dist.sample(&mut rng);
        let fb = DelayedFeedback {
            action: a,
            raw_cost: if a == 0 { 0.0 } else { 1.0 },
            delay: 1,
            threshold: 1,
            acting_prob: dist.prob(a),
        };
        let est = estimate_cost(&fb, 2, EstimatorOptions::IMPORTANCE_WEIGHTED).map_err(|e| e.to_string())?;
        state.update_weights(&est, &advice).map_err(|e| e.to_string())?;
        state.renormalize_if_needed();
    }
    let p = state.action_distribution(&advice).map_err(|e| e.to_string())?.prob(0);
    ensure(p > 0.9, format!("mass on the zero-cost action after 5000 rounds: {p:.6}"))
}

fn eta_exact() -> Outcome {
    let a = optimal_learning_rate(2, 2, 1).map_err(|e| e.to_string())?;
    let b = optimal_learning_rate(100, 2, 1).map_err(|e| e.to_string())?;
    let c = optimal_learning_rate(100, 2, 1_000_000).map_err(|e| e.to_string())?;
    // Direct evaluation of sqrt(100 ln 2 / 2e6).
    let c_expected = 0.005_887_050_112_577_373;
    ensure(
        (a - 0.832_555).abs() <= 1e-6 && b == 1.0 && (c - c_expected).abs() <= 1e-7,
        format!("{a:.7}, {b}, {c:.9} (expected 0.832555, 1, {c_expected:.9})"),
    )
}

// Reference cache scanning a flat list on every request.
fn naive_evictions(trace: &[u32], policy: Policy, cap: usize) -> Vec<Option<u32>> {
    let mut items: Vec<(u32, u64, u64)> = Vec::new();
    let mut out = Vec::new();
    for (clock, &key) in (1u64..).zip(trace) {
        if let Some(it) = items.iter_mut().find(|it| it.0 == key) {
            it.1 = clock;
            it.2 += 1;
            out.push(None);
            continue;
        }
        let mut evicted = None;
        if items.len() == cap {
            let mut v = 0;
            for i in 1..items.len() {
                let better = match policy {
                    Policy::Lru => items[i].1 < items[v].1,
                    Policy::Lfu => items[i].2 < items[v].2 || (items[i].2 == items[v].2 && items[i].1 < items[v].1),
                };
                if better {
                    v = i;
                }
            }
            evicted = Some(items.remove(v).0);
        }
        items.push((key, clock, 1));
        out.push(evicted);
    }
    out
}

fn state_evictions(trace: &[u32], policy: Policy, cap: usize) -> Result<Vec<Option<u32>>, String> {
    let mut cache = CacheState::new(cap).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for (round, &key) in (1u64..).zip(trace) {
        if cache.access(&key, round) == Access::Hit {
            out.push(None);
            continue;
        }
        let victim = if cache.is_full() {
            let slot = cache.advise(policy).map_err(|e| e.to_string())?;
            cache.key_at(slot).copied()
        } else {
            None
        };
        let (_, evicted) = cache
            .insert_with_eviction(key, victim.as_ref(), round)
            .map_err(|e| e.to_string())?;
        out.push(evicted);
    }
    Ok(out)
}

fn policy_oracle() -> Outcome {
    let mut rng = DetRng::new(2024);
    let mut evictions = 0;
    for t in 0..1000 {
        let trace: Vec<u32> = (0..200).map(|_| rng.below(20) as u32).collect();
        for policy in Policy::EXPERTS {
            let expected = naive_evictions(&trace, policy, 5);
            if state_evictions(&trace, policy, 5)? != expected {
                return Err(format!("{} differs on trace {t}", policy.name()));
            }
            evictions += expected.iter().flatten().count();
        }
    }
    Ok(format!("1000 traces x 2 policies identical ({evictions} evictions)"))
}

fn legacy_exact() -> Outcome {
    let values: Vec<f64> = [1usize, 10, 100].iter().map(|&k| legacy_cost(k as u64, k)).collect();
    ensure(
        values.iter().all(|v| (v - 0.005).abs() <= 1e-12),
        format!("legacy_cost(K, K) for K = 1, 10, 100: {values:?}"),
    )
}

/// Mix segments flood LRU with a scan over a hot set; zipf segments move to a
/// new hot set, where LFU's old counts are stale.
const ADAPTIVITY_TRACE: &str = "mix:hot=30,scan=200,len=20000,share=0.5,set=a;zipf:keys=40,len=20000,set=b;repeat:times=3";
const ADAPTIVITY_CACHE: usize = 50;

fn adaptivity() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for seed in 0..10 {
        let cfg = CacheSimConfig {
            trace: TraceInput::Synthetic {
                spec: ADAPTIVITY_TRACE.into(),
            },
            cache_size: ADAPTIVITY_CACHE,
            policies: vec![PolicyChoice::Lru, PolicyChoice::Lfu, PolicyChoice::Olecar],
            learning_rate: None,
            history_size: None,
            cost_mode: None,
            importance_weighting: None,
            seed,
            series: false,
        };
        let rows = cache_sim(&cfg).map_err(|e| e.to_string())?.0;
        let [lru, lfu, ole] = [0, 1, 2].map(|i| rows[i].hit_rate.unwrap_or(f64::NAN));
        let pass = ole >= lru.min(lfu) && ole >= lru.max(lfu) - 0.10;
        ok &= pass;
        lines.push(format!("s{seed}: {ole:.4} in [{:.4}, {:.4}]", lru.min(lfu), lru.max(lfu)));
    }
    ensure(ok, format!("olecar hit rate vs [min, max] of lru/lfu, {}", lines.join("; ")))
}

fn determinism() -> Outcome {
    let configs = [
        r#"{"command":"cache-sim","trace":{"synthetic":{"spec":"mix:hot=20,scan=90,len=8000,share=0.4;zipf:keys=30,len=8000,set=b"}},"cache_size":25,"policies":["lru","lfu","lecar","olecar"],"learning_rate":null,"history_size":null,"cost_mode":null,"importance_weighting":null,"seed":3,"series":true}"#,
        r#"{"command":"bandit-sim","arms":10,"experts":4,"horizon":20000,"env":"switching","means":null,"switch_at":null,"delay_max":20,"learning_rate":"auto","seeds":4,"seed_base":11,"series":true}"#,
        r#"{"command":"sweep","param":"learning-rate","values":["0.1","auto"],"base":{"command":"bandit-sim","arms":5,"experts":3,"horizon":5000,"env":"stochastic","means":null,"switch_at":null,"delay_max":5,"learning_rate":"auto","seeds":3,"seed_base":0,"series":false}}"#,
    ];
    let mut checked = 0;
    for text in configs {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let first = run(&cfg).map_err(|e| e.to_string())?;
        for format in [Format::Json, Format::Csv] {
            let bytes = first.render(format);
            let echo = read_config_echo(std::str::from_utf8(&bytes).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let again = run(&echo.run).map_err(|e| e.to_string())?;
            if again.render(format) != bytes {
                return Err(format!("report differs on rerun of {text}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} reports re-run from their config echo, byte-identical"))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "distribution invariants",
            limit: Some(Duration::from_secs(5)),
            check: distribution_invariants,
        },
        Criterion {
            id: 2,
            name: "estimator unbiasedness",
            limit: Some(Duration::from_secs(10)),
            check: estimator_unbiased,
        },
        Criterion {
            id: 3,
            name: "regret below 2 sqrt(2KT ln N)",
            limit: Some(Duration::from_secs(60)),
            check: regret_bound_holds,
        },
        Criterion {
            id: 4,
            name: "sublinear regret",
            limit: Some(Duration::from_secs(120)),
            check: sublinear,
        },
        Criterion {
            id: 5,
            name: "weight convergence",
            limit: None,
            check: weights_converge,
        },
        Criterion {
            id: 6,
            name: "optimal learning rate",
            limit: None,
            check: eta_exact,
        },
        Criterion {
            id: 7,
            name: "LRU/LFU oracle equivalence",
            limit: Some(Duration::from_secs(10)),
            check: policy_oracle,
        },
        Criterion {
            id: 8,
            name: "legacy cost at d = K",
            limit: None,
            check: legacy_exact,
        },
        Criterion {
            id: 9,
            name: "OLeCaR adaptivity",
            limit: None,
            check: adaptivity,
        },
        Criterion {
            id: 10,
            name: "determinism",
            limit: None,
            check: determinism,
        },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let (mut pass, mut detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        if let Some(limit) = c.limit {
            if elapsed > limit {
                pass = false;
                detail = format!("{detail}; took longer than {limit:?}");
            }
        }
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {} ({:.2?}): {}",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.name,
            elapsed,
            detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
