use poisson_fraud::evaluation::{ImbalanceGroup, MetricKind};
use poisson_fraud::experiment::{run_experiment, ExperimentConfig};
use poisson_fraud::intensity::{Intensity, IntensityModel};
use poisson_fraud::prediction::ModelName;
use poisson_fraud::simulation::{simulate_dataset, SimSpec};
use poisson_fraud::timeline::EventTimeline;
use std::time::Instant;

fn batch(n: usize, g: f64, a: f64, b: f64, h: f64, seed: u64, tag: &str) -> Vec<EventTimeline> {
    let spec = SimSpec {
        n_clients: n,
        genuine_rate: g,
        fraud_model: IntensityModel::new(Intensity::Linear { a, b }, h).unwrap(),
        horizon_days: h,
        seed,
    };
    simulate_dataset(&spec)
        .unwrap()
        .into_iter()
        .filter(|tl| tl.len() >= 2)
        .map(|tl| {
            EventTimeline::new(
                format!("{tag}_{}", tl.client_id()),
                tl.times().to_vec(),
                tl.labels().to_vec(),
                tl.horizon(),
            )
            .unwrap()
        })
        .collect()
}

fn main() {
    for ds_seed in [0u64, 40, 80] {
        let start = Instant::now();
        let mut tls = Vec::new();
        tls.extend(batch(520, 1.2, 0.001, 3.01e-5, 450.0, 101 + ds_seed, "a"));
        tls.extend(batch(260, 1.2, 0.004, 4.44e-4, 150.0, 102 + ds_seed, "b"));
        tls.extend(batch(260, 1.2, 0.010, 1.458e-3, 120.0, 103 + ds_seed, "c"));
        tls.extend(batch(240, 1.2, 0.020, 3.8e-3, 100.0, 104 + ds_seed, "d"));

        let cfg = ExperimentConfig {
            group_sample: 200,
            seed: 7 + ds_seed,
            ..Default::default()
        };
        let out = run_experiment(&tls, &cfg).unwrap();
        println!("--- dataset seed block {ds_seed}  ({:?})", start.elapsed());
        println!("{:18} {:>8} {:>8} {:>8} {:>8} | pooled", "meanAP", "G1", "G2", "G3", "G4");
        let mut pooled = std::collections::BTreeMap::new();
        for model in ModelName::ALL {
            print!("{:18}", model.to_string());
            let mut tot = 0.0;
            let mut wsum = 0.0;
            for group in ImbalanceGroup::ALL {
                let cell = out.report.summaries.iter()
                    .find(|s| s.model == model && s.group == group && s.metric == MetricKind::Ap);
                match cell {
                    Some(s) => { print!(" {:8.4}", s.mean); tot += s.mean * s.n as f64; wsum += s.n as f64; }
                    None => print!("     none"),
                }
            }
            let p = tot / wsum;
            pooled.insert(model, p);
            println!(" | {p:8.4}");
        }
        for (s, d) in [(ModelName::HomoStatic, ModelName::HomoDynamic),
                       (ModelName::LinearStatic, ModelName::LinearDynamic),
                       (ModelName::QuadraticStatic, ModelName::QuadraticDynamic)] {
            println!("pooled {s} - {d} = {:+.4}", pooled[&s] - pooled[&d]);
        }
        let mono_ok = ModelName::ALL.iter().filter(|m| **m != ModelName::NaiveStatic).all(|&m| {
            let v: Vec<f64> = ImbalanceGroup::ALL.iter().map(|&g| out.report.relative_map(m, g).unwrap()).collect();
            v.windows(2).all(|w| w[0] > w[1])
        });
        println!("relative-MAP monotone for all models: {mono_ok}");
    }
}
