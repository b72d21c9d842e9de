//! IMU CSV files with the header `t,ax,ay,az,wx,wy,wz`.

use std::io::{Read, Write};
use std::path::Path;

use qa_hybrid_core::SensorStream;

use crate::error::RunError;

pub const HEADER: [&str; 7] = ["t", "ax", "ay", "az", "wx", "wy", "wz"];

/// Parse and validate an IMU CSV. The rate is the inverse of the median
/// sample period; any step above two periods is rejected as a gap.
pub fn read_stream<R: Read>(reader: R) -> Result<SensorStream, RunError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != HEADER {
        return Err(RunError::Data(format!("expected header {}, found {}", HEADER.join(","), header.join(","))));
    }
    let mut s = SensorStream::zeros(1.0, 0, 0);
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut v = [0.0; 7];
        for (j, cell) in rec.iter().enumerate() {
            let x: f64 = cell
                .parse()
                .map_err(|_| RunError::Data(format!("row {}: column `{}` is not a number: {cell:?}", row + 2, HEADER[j])))?;
            if !x.is_finite() {
                return Err(RunError::Data(format!("row {}: column `{}` is not finite", row + 2, HEADER[j])));
            }
            v[j] = x;
        }
        if let Some(&prev) = s.t.last() {
            if v[0] <= prev {
                return Err(RunError::Data(format!("row {}: time {} not after {prev}", row + 2, v[0])));
            }
        }
        s.t.push(v[0]);
        s.ax.push(v[1]);
        s.ay.push(v[2]);
        s.az.push(v[3]);
        s.wx.push(v[4]);
        s.wy.push(v[5]);
        s.wz.push(v[6]);
    }
    if s.len() < 2 {
        return Err(RunError::Data("need at least two samples".into()));
    }
    let mut steps: Vec<f64> = s.t.windows(2).map(|w| w[1] - w[0]).collect();
    steps.sort_by(f64::total_cmp);
    let dt = steps[steps.len() / 2];
    for w in s.t.windows(2) {
        if w[1] - w[0] > 2.0 * dt {
            return Err(RunError::Data(format!("gap of {} s after t = {}", w[1] - w[0], w[0])));
        }
    }
    s.rate = 1.0 / dt;
    Ok(s)
}

pub fn read_stream_path(path: &Path) -> Result<SensorStream, RunError> {
    let file = std::fs::File::open(path).map_err(|e| RunError::Data(format!("{}: {e}", path.display())))?;
    read_stream(std::io::BufReader::new(file))
}

/// Write a stream in the same schema; values round-trip exactly.
pub fn write_stream<W: Write>(writer: W, s: &SensorStream) -> Result<(), RunError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for i in 0..s.len() {
        let row = [s.t[i], s.ax[i], s.ay[i], s.az[i], s.wx[i], s.wy[i], s.wz[i]];
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use qa_hybrid_core::synth::{gen_truth_stream, ChannelModel};
    use qa_hybrid_core::TruthParams;

    fn sample() -> SensorStream {
        let truth = TruthParams {
            accel_z: ChannelModel::white(0.38),
            accel_x: ChannelModel::white(0.1),
            omega_y: ChannelModel::held(13e-3),
            ..TruthParams::default()
        };
        gen_truth_stream(&truth, 2.0, 1000.0, 0.1, 4).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let s = sample();
        let mut buf = Vec::new();
        write_stream(&mut buf, &s).unwrap();
        let back = read_stream(buf.as_slice()).unwrap();
        assert_eq!(back.t, s.t);
        assert_eq!(back.az, s.az);
        assert_eq!(back.wy, s.wy);
        assert!((back.rate - 1000.0).abs() < 1e-6);
    }

    #[test]
    fn gap_is_rejected_with_its_time() {
        let mut s = sample();
        for c in [&mut s.t, &mut s.ax, &mut s.ay, &mut s.az, &mut s.wx, &mut s.wy, &mut s.wz] {
            c.drain(500..1500);
        }
        let mut buf = Vec::new();
        write_stream(&mut buf, &s).unwrap();
        let e = read_stream(buf.as_slice()).unwrap_err().to_string();
        assert!(e.contains("gap") && e.contains("0.499"), "{e}");
    }

    #[test]
    fn bad_files() {
        let e = read_stream("t,ax,ay,az,wx,wy\n0,0,0,0,0,0\n".as_bytes()).unwrap_err();
        assert!(e.to_string().contains("header"));
        let e = read_stream("t,ax,ay,az,wx,wy,wz\n0,0,0,0,0,0,0\n0.001,NaN,0,0,0,0,0\n".as_bytes()).unwrap_err();
        assert!(e.to_string().contains("ax"), "{e}");
        let e = read_stream("t,ax,ay,az,wx,wy,wz\n0,0,0,0,0,0,0\n0,0,0,0,0,0,0\n".as_bytes()).unwrap_err();
        assert!(e.to_string().contains("not after"), "{e}");
    }
}
