//! CSV emission and ingestion (RFC 4180: CRLF rows, quoted on demand).

use std::io::{Read, Write};

use crate::error::Error;
use crate::integrator::StepRecord;

use super::table::{ConvRow, ConvergenceTable, ScaleVar};
use super::VerifyRow;

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(w)
}

pub fn write_conv_table<W: Write>(w: W, table: &ConvergenceTable) -> Result<(), Error> {
    let mut out = writer(w);
    for row in &table.rows {
        out.serialize(row)?;
    }
    // An empty table still gets the header row.
    if table.rows.is_empty() {
        out.write_record(CONV_HEADER)?;
    }
    out.flush()?;
    Ok(())
}

pub const CONV_HEADER: &[&str] = &[
    "level",
    "h",
    "tau",
    "err_L2_final",
    "err_H1_final",
    "err_L2_max",
    "err_H1_max",
    "rate_L2",
    "rate_H1",
    "energy_final",
    "min_nodal_len",
    "max_nodal_len",
    "eta0",
    "etan",
    "wall_time_s",
];

pub fn read_conv_table<R: Read>(r: R, scale: ScaleVar) -> Result<ConvergenceTable, Error> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for rec in rdr.deserialize::<ConvRow>() {
        rows.push(rec?);
    }
    Ok(ConvergenceTable { scale, rows })
}

pub fn write_step_records<W: Write>(w: W, records: &[StepRecord<f64>]) -> Result<(), Error> {
    let mut out = writer(w);
    for rec in records {
        out.serialize(rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_verify_rows<W: Write>(w: W, rows: &[VerifyRow]) -> Result<(), Error> {
    let mut out = writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}
