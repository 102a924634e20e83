use std::io::Write;

use anyhow::Result;
use centnorm::simulation::sensitivity_curve;
use centnorm::{Prestandardization, StylizedDistribution, TransformKind};

use crate::args::SensitivityArgs;
use crate::format::{g12, g12_opt};
use crate::table::tsv_writer;

pub fn run<W: Write>(args: &SensitivityArgs, out: W) -> Result<bool> {
    let kind = args.tuning.family;
    let spec = args.tuning.spec(args.method, Prestandardization::None);
    let log_scale = kind == TransformKind::BoxCox;
    let positions: Vec<f64> = if log_scale {
        args.z.0.iter().map(|z| z.exp()).collect()
    } else {
        args.z.0.clone()
    };
    let curve = sensitivity_curve(
        &spec,
        StylizedDistribution::default_for(kind),
        args.n,
        &positions,
    )?;
    log::info!(
        "{} on the stylized sample: {}",
        spec.label(),
        curve.baseline
    );

    let mut w = tsv_writer(out);
    if log_scale {
        w.write_record(["log_z", "z", "sc"])?;
    } else {
        w.write_record(["z", "sc"])?;
    }
    for ((&g, &z), &sc) in args.z.0.iter().zip(&curve.z).zip(&curve.sc) {
        if sc.is_none() {
            log::warn!("fit failed at z = {z}");
        }
        if log_scale {
            w.write_record([g12(g), g12(z), g12_opt(sc)])?;
        } else {
            w.write_record([g12(z), g12_opt(sc)])?;
        }
    }
    w.flush()?;
    Ok(true)
}
