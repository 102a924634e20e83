use std::io::Write;

use anyhow::Result;
use centnorm::simulation::run_bias_mse;
use centnorm::{EstimatorSpec, Prestandardization, SimulationScenario};

use crate::args::SimulateArgs;
use crate::format::g12;
use crate::table::tsv_writer;

pub const EPS_SWEEP: [f64; 4] = [0.0, 0.05, 0.10, 0.15];

/// The `(epsilon, k)` cells to run.
pub fn grid(args: &SimulateArgs) -> Vec<(f64, u32)> {
    if args.k_sweep {
        (0..=10).map(|k| (args.eps, k)).collect()
    } else if args.eps_sweep {
        EPS_SWEEP.iter().map(|&e| (e, args.k)).collect()
    } else {
        vec![(args.eps, args.k)]
    }
}

pub fn run<W: Write>(args: &SimulateArgs, out: W) -> Result<bool> {
    let specs: Vec<EstimatorSpec> = args
        .method
        .iter()
        .map(|&m| args.tuning.spec(m, Prestandardization::None))
        .collect();
    let mut w = tsv_writer(out);
    w.write_record([
        "family",
        "true_lambda",
        "n",
        "replications",
        "epsilon",
        "k",
        "estimator",
        "bias",
        "mse",
        "failures",
    ])?;
    for (epsilon, k) in grid(args) {
        let scenario = SimulationScenario {
            n: args.n,
            replications: args.replications,
            ..SimulationScenario::new(args.tuning.family, args.lambda)
                .contaminated(epsilon, k)
                .with_seed(args.seed)
        };
        for r in run_bias_mse(&scenario, &specs)? {
            w.write_record([
                args.tuning.family.short_name().into(),
                g12(args.lambda),
                args.n.to_string(),
                args.replications.to_string(),
                g12(epsilon),
                k.to_string(),
                r.label(),
                g12(r.bias),
                g12(r.mse),
                r.failures.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(true)
}
