//! Per-epoch metrics CSV: `epoch,train_loss,train_acc,val_loss,val_acc`,
//! reals printed with 6 significant digits, newline-terminated. The
//! schema is identical across cell kinds so curves overlay directly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRow {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

fn sig6(v: f64) -> String {
    format!("{v:.5e}")
}

pub fn emit_metrics_csv(path: &Path, rows: &[EpochRow]) -> std::io::Result<()> {
    assert!(!rows.is_empty(), "emit_metrics_csv: no rows");
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "epoch,train_loss,train_acc,val_loss,val_acc")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.epoch,
            sig6(r.train_loss),
            sig6(r.train_acc),
            sig6(r.val_loss),
            sig6(r.val_acc)
        )?;
    }
    w.flush()
}
