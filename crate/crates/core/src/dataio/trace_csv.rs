//! IMU traces as CSV.
//!
//! A file holds one block per sensor:
//!
//! ```text
//! # sensor=wrist rate=100
//! t,ax,ay,az,gx,gy,gz
//! 0.0000000000000000e0,...
//! ```
//!
//! Values are written with 17 significant digits so they read back exactly.
//! A file without a `# sensor=` line is read as a single sensor named
//! `sensor0`, with the rate taken from the first two time stamps.

use std::path::Path;

use csv::{ReaderBuilder, Trim, WriterBuilder};

use crate::error::{Error, Result};
use crate::model::SensorTrace;

pub const HEADER: &str = "t,ax,ay,az,gx,gy,gz";
const COLUMNS: [&str; 7] = ["t", "ax", "ay", "az", "gx", "gy", "gz"];

pub fn traces_to_string(traces: &[SensorTrace]) -> String {
    let mut out = String::new();
    for trace in traces {
        out.push_str(&format!("# sensor={} rate={}\n", trace.sensor_id, trace.sample_rate_hz));
        let mut w = WriterBuilder::new().from_writer(Vec::new());
        w.write_record(COLUMNS).expect("in-memory write");
        for (t, (a, g)) in trace.accel.iter().zip(&trace.gyro).enumerate() {
            let time = t as f64 / trace.sample_rate_hz;
            let row = std::iter::once(time).chain(a.iter().copied()).chain(g.iter().copied());
            w.write_record(row.map(|v| format!("{v:.16e}"))).expect("in-memory write");
        }
        let bytes = w.into_inner().expect("in-memory flush");
        out.push_str(std::str::from_utf8(&bytes).expect("ascii output"));
    }
    out
}

/// One sensor's rows: the metadata line (if any) and the CSV text after it.
struct Block<'a> {
    sensor_id: String,
    rate: Option<f64>,
    /// 1-based file line of the block's first CSV line.
    first_line: usize,
    body: Vec<&'a str>,
}

fn parse_meta(text: &str, line: usize) -> Result<(String, Option<f64>)> {
    let mut sensor = None;
    let mut rate = None;
    for field in text.split_whitespace() {
        let Some((key, value)) = field.split_once('=') else {
            continue;
        };
        match key {
            "sensor" => sensor = Some(value.to_string()),
            "rate" => {
                let r: f64 = value.parse().map_err(|_| Error::Csv {
                    line,
                    message: format!("bad rate `{value}`"),
                })?;
                rate = Some(r);
            }
            _ => {}
        }
    }
    let sensor = sensor.ok_or_else(|| Error::Csv {
        line,
        message: "block header lacks `sensor=`".into(),
    })?;
    Ok((sensor, rate))
}

/// Splits the file on `# sensor=` lines. Other comment lines are dropped,
/// blank lines are kept so record positions still map to file lines.
fn split_blocks(text: &str) -> Result<Vec<Block<'_>>> {
    let mut blocks: Vec<Block> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if let Some(meta) = raw.trim().strip_prefix('#') {
            if meta.trim_start().starts_with("sensor=") {
                let (sensor_id, rate) = parse_meta(meta, line)?;
                blocks.push(Block {
                    sensor_id,
                    rate,
                    first_line: line + 1,
                    body: Vec::new(),
                });
            } else if let Some(b) = blocks.last_mut() {
                b.body.push("");
            }
            continue;
        }
        if blocks.is_empty() {
            if raw.trim().is_empty() {
                continue;
            }
            blocks.push(Block {
                sensor_id: "sensor0".into(),
                rate: None,
                first_line: line,
                body: Vec::new(),
            });
        }
        blocks.last_mut().expect("block exists").body.push(raw);
    }
    Ok(blocks)
}

fn csv_error(block: &Block, e: &csv::Error) -> Error {
    let line = e.position().map_or(block.first_line, |p| block.first_line + p.line() as usize - 1);
    Error::Csv {
        line,
        message: e.to_string(),
    }
}

fn parse_block(block: Block) -> Result<SensorTrace> {
    let body = block.body.join("\n");
    let mut reader = ReaderBuilder::new().trim(Trim::All).from_reader(body.as_bytes());
    let header = reader.headers().map_err(|e| csv_error(&block, &e))?.clone();
    if header.iter().ne(COLUMNS) {
        let line = header.position().map_or(block.first_line, |p| block.first_line + p.line() as usize - 1);
        return Err(Error::Csv {
            line,
            message: format!("expected header `{HEADER}`"),
        });
    }
    let mut times = Vec::new();
    let mut accel = Vec::new();
    let mut gyro = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&block, &e))?;
        let line = record.position().map_or(block.first_line, |p| block.first_line + p.line() as usize - 1);
        let mut values = [0.0f64; 7];
        for (k, (v, cell)) in values.iter_mut().zip(record.iter()).enumerate() {
            *v = cell.parse().map_err(|_| Error::Csv {
                line,
                message: format!("non-numeric value `{cell}` in column {}", k + 1),
            })?;
        }
        times.push(values[0]);
        accel.push([values[1], values[2], values[3]]);
        gyro.push([values[4], values[5], values[6]]);
    }
    let rate = match block.rate {
        Some(r) => r,
        None if times.len() >= 2 && times[1] > times[0] => 1.0 / (times[1] - times[0]),
        None => {
            return Err(Error::Csv {
                line: block.first_line,
                message: "cannot infer the sample rate; add `# sensor=<id> rate=<hz>`".into(),
            })
        }
    };
    let trace = SensorTrace {
        sensor_id: block.sensor_id,
        sample_rate_hz: rate,
        accel,
        gyro,
    };
    trace.validate().map_err(|e| Error::Csv {
        line: block.first_line,
        message: e.to_string(),
    })?;
    Ok(trace)
}

pub fn traces_from_str(text: &str) -> Result<Vec<SensorTrace>> {
    let blocks = split_blocks(text)?;
    if blocks.is_empty() {
        return Err(Error::Csv {
            line: 1,
            message: "empty file".into(),
        });
    }
    blocks.into_iter().map(parse_block).collect()
}

pub fn read_traces(path: impl AsRef<Path>) -> Result<Vec<SensorTrace>> {
    traces_from_str(&std::fs::read_to_string(path)?)
}

pub fn write_traces(path: impl AsRef<Path>, traces: &[SensorTrace]) -> Result<()> {
    std::fs::write(path, traces_to_string(traces))?;
    Ok(())
}
