use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{DemGrid, DEFAULT_NODATA};
use crate::error::{Error, Result};

/// On-disk raster encodings.
///
/// * `EsriAscii`: `ncols`, `nrows`, `xllcorner`, `yllcorner`, `cellsize`,
///   `NODATA_value` header lines, then rows top to bottom. Heights are
///   written with 6 significant digits.
/// * `RawF32`: little-endian `f32` payload, row-major from the top row, plus a
///   `key=value` sidecar at `<payload>.hdr`. Round-trips bit-exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterFormat {
    EsriAscii,
    RawF32,
}

impl RasterFormat {
    /// Guesses the format from the file extension; anything unknown is ESRI ASCII.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ["f32", "raw", "bin"].contains(&ext.to_ascii_lowercase().as_str()) => {
                RasterFormat::RawF32
            }
            _ => RasterFormat::EsriAscii,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            RasterFormat::EsriAscii => "asc",
            RasterFormat::RawF32 => "f32",
        }
    }
}

pub fn read_grid(path: impl AsRef<Path>, format: RasterFormat) -> Result<DemGrid> {
    let path = path.as_ref();
    match format {
        RasterFormat::EsriAscii => read_esri_ascii(path),
        RasterFormat::RawF32 => read_raw_f32(path),
    }
}

pub fn write_grid(grid: &DemGrid, path: impl AsRef<Path>, format: RasterFormat) -> Result<()> {
    let path = path.as_ref();
    match format {
        RasterFormat::EsriAscii => write_esri_ascii(grid, path),
        RasterFormat::RawF32 => write_raw_f32(grid, path),
    }
}

/// Sidecar header location for a raw payload file.
pub(crate) fn sidecar_path(payload: &Path) -> PathBuf {
    let mut s = payload.as_os_str().to_owned();
    s.push(".hdr");
    PathBuf::from(s)
}

fn read_esri_ascii(path: &Path) -> Result<DemGrid> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let perr = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut ncols = None;
    let mut nrows = None;
    let mut x = None;
    let mut y = None;
    let mut x_center = false;
    let mut y_center = false;
    let mut cellsize = None;
    let mut nodata = DEFAULT_NODATA;

    let mut lines = text.lines().enumerate().peekable();
    while let Some(&(idx, line)) = lines.peek() {
        let mut tokens = line.split_whitespace();
        let Some(key) = tokens.next() else {
            lines.next();
            continue;
        };
        if key.parse::<f64>().is_ok() {
            break;
        }
        let lineno = idx + 1;
        let value = tokens
            .next()
            .ok_or_else(|| perr(lineno, format!("header key '{key}' has no value")))?;
        let num: f64 = value.parse().map_err(|_| {
            perr(
                lineno,
                format!("header value '{value}' for '{key}' is not a number"),
            )
        })?;
        match key.to_ascii_lowercase().as_str() {
            "ncols" => {
                ncols = Some(parse_count(num).ok_or_else(|| perr(lineno, "bad ncols".into()))?)
            }
            "nrows" => {
                nrows = Some(parse_count(num).ok_or_else(|| perr(lineno, "bad nrows".into()))?)
            }
            "xllcorner" => x = Some(num),
            "yllcorner" => y = Some(num),
            "xllcenter" => {
                x = Some(num);
                x_center = true;
            }
            "yllcenter" => {
                y = Some(num);
                y_center = true;
            }
            "cellsize" => cellsize = Some(num),
            "nodata_value" => nodata = num,
            other => return Err(perr(lineno, format!("unknown header key '{other}'"))),
        }
        lines.next();
    }

    let ncols = ncols.ok_or_else(|| perr(1, "missing ncols".into()))?;
    let nrows = nrows.ok_or_else(|| perr(1, "missing nrows".into()))?;
    let cellsize = cellsize.ok_or_else(|| perr(1, "missing cellsize".into()))?;
    let mut origin_x = x.ok_or_else(|| perr(1, "missing xllcorner".into()))?;
    let mut origin_y = y.ok_or_else(|| perr(1, "missing yllcorner".into()))?;
    if x_center {
        origin_x -= 0.5 * cellsize;
    }
    if y_center {
        origin_y -= 0.5 * cellsize;
    }

    let expected = nrows * ncols;
    let mut heights = Vec::with_capacity(expected);
    let mut last_line = 0;
    for (idx, line) in lines {
        last_line = idx + 1;
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| perr(idx + 1, format!("non-numeric cell '{tok}'")))?;
            if !v.is_finite() {
                return Err(perr(idx + 1, format!("non-finite cell '{tok}'")));
            }
            if heights.len() == expected {
                return Err(perr(
                    idx + 1,
                    format!("more than {expected} cells for a {nrows}x{ncols} grid"),
                ));
            }
            heights.push(v);
        }
    }
    if heights.len() != expected {
        return Err(perr(
            last_line,
            format!(
                "found {} cells, header declares {nrows}x{ncols}",
                heights.len()
            ),
        ));
    }
    DemGrid::with_georef(nrows, ncols, cellsize, origin_x, origin_y, nodata, heights)
}

fn parse_count(v: f64) -> Option<usize> {
    (v >= 1.0 && v.fract() == 0.0 && v < u32::MAX as f64).then_some(v as usize)
}

fn write_esri_ascii(grid: &DemGrid, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let nodata = format!("{}", grid.nodata());
    let mut body = String::new();
    body.push_str(&format!("ncols {}\n", grid.cols()));
    body.push_str(&format!("nrows {}\n", grid.rows()));
    body.push_str(&format!("xllcorner {}\n", grid.origin_x));
    body.push_str(&format!("yllcorner {}\n", grid.origin_y));
    body.push_str(&format!("cellsize {}\n", grid.cell_size));
    body.push_str(&format!("NODATA_value {nodata}\n"));
    for row in grid.heights().chunks(grid.cols()) {
        let mut first = true;
        for &h in row {
            if !first {
                body.push(' ');
            }
            first = false;
            if h == grid.nodata() {
                body.push_str(&nodata);
            } else {
                body.push_str(&format_significant(h, 6));
            }
        }
        body.push('\n');
    }
    w.write_all(body.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Decimal rendering with `digits` significant digits and trailing zeros trimmed.
pub(crate) fn format_significant(v: f64, digits: i32) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (digits - 1 - magnitude).max(0) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

fn read_raw_f32(path: &Path) -> Result<DemGrid> {
    let hdr_path = sidecar_path(path);
    let text = fs::read_to_string(&hdr_path).map_err(|e| Error::io(&hdr_path, e))?;
    let perr = |line: usize, msg: String| Error::Parse {
        path: hdr_path.clone(),
        line,
        msg,
    };

    let mut rows = None;
    let mut cols = None;
    let mut cell_size = 1.0;
    let mut origin_x = 0.0;
    let mut origin_y = 0.0;
    let mut nodata = DEFAULT_NODATA;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| perr(idx + 1, format!("expected key=value, got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let num: f64 = value.parse().map_err(|_| {
            perr(
                idx + 1,
                format!("value '{value}' for '{key}' is not a number"),
            )
        })?;
        match key {
            "rows" => {
                rows = Some(parse_count(num).ok_or_else(|| perr(idx + 1, "bad rows".into()))?)
            }
            "cols" => {
                cols = Some(parse_count(num).ok_or_else(|| perr(idx + 1, "bad cols".into()))?)
            }
            "cell_size" => cell_size = num,
            "origin_x" => origin_x = num,
            "origin_y" => origin_y = num,
            "nodata" => nodata = num,
            other => return Err(perr(idx + 1, format!("unknown key '{other}'"))),
        }
    }
    let rows = rows.ok_or_else(|| perr(0, "missing rows".into()))?;
    let cols = cols.ok_or_else(|| perr(0, "missing cols".into()))?;

    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = rows * cols * 4;
    if bytes.len() != expected {
        return Err(Error::PayloadSize {
            path: path.to_path_buf(),
            got: bytes.len(),
            expected,
        });
    }
    let nodata32 = nodata as f32;
    let heights = bytes
        .chunks_exact(4)
        .map(|b| {
            let v = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
            if v == nodata32 || !v.is_finite() {
                nodata
            } else {
                f64::from(v)
            }
        })
        .collect();
    DemGrid::with_georef(rows, cols, cell_size, origin_x, origin_y, nodata, heights)
}

fn write_raw_f32(grid: &DemGrid, path: &Path) -> Result<()> {
    let hdr_path = sidecar_path(path);
    let header = format!(
        "rows={}\ncols={}\ncell_size={}\norigin_x={}\norigin_y={}\nnodata={}\n",
        grid.rows(),
        grid.cols(),
        grid.cell_size,
        grid.origin_x,
        grid.origin_y,
        grid.nodata()
    );
    fs::write(&hdr_path, header).map_err(|e| Error::io(&hdr_path, e))?;

    let mut payload = Vec::with_capacity(grid.len() * 4);
    for &h in grid.heights() {
        payload.extend_from_slice(&(h as f32).to_le_bytes());
    }
    fs::write(path, payload).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn reads_two_by_two_top_row_first() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "g.asc",
            "ncols 2\nnrows 2\nxllcorner 10\nyllcorner 20\ncellsize 0.5\nNODATA_value -9999\n1 2\n3 4\n",
        );
        let g = read_grid(&p, RasterFormat::EsriAscii).unwrap();
        assert_eq!((g.rows(), g.cols()), (2, 2));
        assert_eq!(g.heights(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(g.at(0, 1), Some(2.0));
        assert_eq!(g.at(1, 0), Some(3.0));
        assert_eq!((g.origin_x, g.origin_y, g.cell_size), (10.0, 20.0, 0.5));
    }

    #[test]
    fn nodata_sentinel_is_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "g.asc",
            "ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n5 -9999\n",
        );
        let g = read_grid(&p, RasterFormat::EsriAscii).unwrap();
        assert_eq!(g.get(1), None);
        assert_eq!(g.valid_count(), 1);
    }

    #[test]
    fn header_and_payload_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let head = "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n";
        let short = write(dir.path(), "a.asc", &format!("{head}1 2\n3\n"));
        let bad = write(dir.path(), "b.asc", &format!("{head}1 2\n3 x\n"));
        let hdr = write(dir.path(), "c.asc", "ncols two\n");
        let missing = write(dir.path(), "d.asc", "ncols 2\nxllcorner 0\n1 2\n");

        let msg = read_grid(&short, RasterFormat::EsriAscii)
            .unwrap_err()
            .to_string();
        assert!(
            msg.contains(":8:") && msg.contains("found 3 cells"),
            "{msg}"
        );
        let msg = read_grid(&bad, RasterFormat::EsriAscii)
            .unwrap_err()
            .to_string();
        assert!(msg.contains(":8:") && msg.contains("'x'"), "{msg}");
        let msg = read_grid(&hdr, RasterFormat::EsriAscii)
            .unwrap_err()
            .to_string();
        assert!(msg.contains(":1:"), "{msg}");
        assert!(read_grid(&missing, RasterFormat::EsriAscii).is_err());
    }

    #[test]
    fn zero_grid_and_sentinel_written_verbatim() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("z.asc");
        let mut heights = vec![0.0; 16];
        heights[5] = -9999.0;
        let g = DemGrid::new(4, 4, heights, -9999.0).unwrap();
        write_grid(&g, &p, RasterFormat::EsriAscii).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.contains("0 -9999 0 0"));
        let back = read_grid(&p, RasterFormat::EsriAscii).unwrap();
        assert_eq!(back, g);

        let raw = dir.path().join("z.f32");
        write_grid(&g.filled_like(0.0), &raw, RasterFormat::RawF32).unwrap();
        let bytes = fs::read(&raw).unwrap();
        assert_eq!(bytes.len(), 64);
        assert!(bytes.iter().all(|&b| b == 0));
    }

    #[test]
    fn raw_payload_size_is_checked() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.f32");
        fs::write(sidecar_path(&p), "rows=2\ncols=2\nnodata=-9999\n").unwrap();
        fs::write(&p, [0u8; 12]).unwrap();
        assert!(matches!(
            read_grid(&p, RasterFormat::RawF32),
            Err(Error::PayloadSize {
                got: 12,
                expected: 16,
                ..
            })
        ));
    }

    #[test]
    fn ascii_keeps_six_significant_digits() {
        assert_eq!(format_significant(523.4567891, 6), "523.457");
        assert_eq!(format_significant(0.000123456789, 6), "0.000123457");
        assert_eq!(format_significant(1234567.0, 6), "1234567");
        assert_eq!(format_significant(-2.5, 6), "-2.5");
        assert_eq!(format_significant(-0.0000000001, 6), "-0.0000000001");
    }

    #[test]
    fn format_guess_from_extension() {
        assert_eq!(
            RasterFormat::from_path(Path::new("a.F32")),
            RasterFormat::RawF32
        );
        assert_eq!(
            RasterFormat::from_path(Path::new("a.asc")),
            RasterFormat::EsriAscii
        );
        assert_eq!(
            RasterFormat::from_path(Path::new("a")),
            RasterFormat::EsriAscii
        );
    }
}
