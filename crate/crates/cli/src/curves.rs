//! CSV emission of two-outcome entropy curves S(x, 1 − x).

use std::io::Write;

use ctxent_core::entropy::{two_outcome_curve, EntropyKind};

use crate::CliError;

/// Writes `x,value` when only Shannon is requested, otherwise long-format `x,q,value` rows
/// (q = 0 for Hartley, 1 for Shannon, inf for Chebyshev), one block per kind.
pub fn write_curves<W: Write>(kinds: &[EntropyKind], points: usize, out: W) -> Result<(), CliError> {
    if points < 2 {
        return Err(CliError::Input("a curve needs at least two grid points".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    let shannon_only = kinds.iter().all(|k| *k == EntropyKind::Shannon);
    if shannon_only {
        w.write_record(["x", "value"])?;
    } else {
        w.write_record(["x", "q", "value"])?;
    }
    for kind in kinds {
        for (x, v) in two_outcome_curve(*kind, points) {
            if shannon_only {
                w.write_record([x.to_string(), v.to_string()])?;
            } else {
                w.write_record([x.to_string(), kind.order().to_string(), v.to_string()])?;
            }
        }
    }
    w.flush().map_err(|e| CliError::Io { path: "<csv>".into(), source: e })?;
    Ok(())
}
