//! On-disk formats. Grids are JSON objects (or CSV with a dims header),
//! moment tables are JSON with zero entries omitted, and spectral family
//! members are JSON listing cyclotomic coordinates per support point.
//! Every value is a canonical rational string, "p/q" or "n", so outputs
//! are byte-deterministic; writes go through a temp file and rename.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use gridcorr::groups::Grid;
use gridcorr::moments::MomentTable;
use gridcorr::spectral::{RatFn, SpecFn};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct GridFileRaw {
    dims: Vec<u64>,
    values: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct MomentEntryRaw {
    shift: Vec<Vec<u64>>,
    value: String,
}

#[derive(Serialize, Deserialize)]
struct MomentFileRaw {
    dims: Vec<u64>,
    max_order: usize,
    entries: Vec<MomentEntryRaw>,
}

#[derive(Serialize)]
struct SpectrumEntryRaw {
    point: Vec<u64>,
    coords: Vec<String>,
    den: String,
}

#[derive(Serialize)]
struct SpectrumFileRaw {
    dims: Vec<u64>,
    conductor: u64,
    entries: Vec<SpectrumEntryRaw>,
}

/// Either payload `reconstruct` accepts.
pub enum InputFile {
    Grid(RatFn),
    Moments(MomentTable),
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    BigRational::from_str(s.trim()).with_context(|| format!("invalid rational {s:?}"))
}

pub fn rational_string(v: &BigRational) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Write through a sibling temp file so readers never observe a partial
/// file and reruns produce identical bytes or nothing.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    fs::write(tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn to_pretty_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

fn grid_from_raw(raw: GridFileRaw) -> Result<RatFn> {
    let g = Grid::new(&raw.dims)?;
    if raw.values.len() as u64 != g.order() {
        bail!(
            "grid of dims {:?} needs {} values, file has {}",
            raw.dims,
            g.order(),
            raw.values.len()
        );
    }
    let values = raw.values.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
    Ok(RatFn::new(g, values)?)
}

fn grid_from_csv(text: &str) -> Result<RatFn> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().context("empty csv grid file")?;
    let dims = header
        .split(',')
        .map(|t| t.trim().parse::<u64>().with_context(|| format!("invalid dimension {t:?}")))
        .collect::<Result<Vec<_>>>()?;
    let g = Grid::new(&dims)?;
    let mut values = Vec::with_capacity(g.order() as usize);
    for line in lines {
        for tok in line.split(',') {
            values.push(parse_rational(tok)?);
        }
    }
    if values.len() as u64 != g.order() {
        bail!("grid of dims {dims:?} needs {} values, csv has {}", g.order(), values.len());
    }
    Ok(RatFn::new(g, values)?)
}

/// Grid files are sniffed by the first byte: JSON objects start with a
/// brace, anything else is treated as CSV.
pub fn read_grid(path: &Path) -> Result<RatFn> {
    match read_input(path)? {
        InputFile::Grid(f) => Ok(f),
        InputFile::Moments(_) => bail!("{} is a moment file, expected a grid", path.display()),
    }
}

pub fn read_input(path: &Path) -> Result<InputFile> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        let value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let obj = value.as_object().context("top-level JSON value is not an object")?;
        if obj.contains_key("values") {
            let raw: GridFileRaw = serde_json::from_value(value)?;
            Ok(InputFile::Grid(grid_from_raw(raw)?))
        } else if obj.contains_key("max_order") {
            Ok(InputFile::Moments(moments_from_value(value)?))
        } else {
            bail!("{}: JSON object is neither a grid (values) nor moments (max_order)", path.display());
        }
    } else {
        Ok(InputFile::Grid(grid_from_csv(&text).with_context(|| path.display().to_string())?))
    }
}

pub fn write_grid_json(path: &Path, f: &RatFn) -> Result<()> {
    let raw = GridFileRaw {
        dims: f.grid().dims().to_vec(),
        values: f.values().iter().map(rational_string).collect(),
    };
    write_atomic(path, &to_pretty_bytes(&raw)?)
}

/// CSV layout: one header row with the dims, then the values row-major
/// with one row per slice of the last dimension.
pub fn write_grid_csv(path: &Path, f: &RatFn) -> Result<()> {
    let dims = f.grid().dims();
    let width = *dims.last().expect("grids have at least one dimension") as usize;
    let mut out = String::new();
    out.push_str(&dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","));
    out.push('\n');
    for row in f.values().chunks(width) {
        out.push_str(&row.iter().map(rational_string).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

fn moments_from_value(value: serde_json::Value) -> Result<MomentTable> {
    let raw: MomentFileRaw = serde_json::from_value(value)?;
    let g = Grid::new(&raw.dims)?;
    let mut entries = Vec::with_capacity(raw.entries.len());
    let mut seen = std::collections::BTreeSet::new();
    for e in &raw.entries {
        if !seen.insert(&e.shift) {
            bail!("duplicate moment entry for shift {:?}", e.shift);
        }
        entries.push((e.shift.clone(), parse_rational(&e.value)?));
    }
    Ok(MomentTable::from_entries(g, raw.max_order, entries)?)
}

/// Canonical moment serialization: nonzero entries only, sorted by order
/// and then lexicographically by shift tuple.
pub fn write_moments(path: &Path, table: &MomentTable) -> Result<()> {
    let mut entries = Vec::new();
    for n in 1..=table.max_order() {
        let mut per_order = table.entries(n)?;
        per_order.sort_by(|a, b| a.0.cmp(&b.0));
        for (shift, v) in per_order {
            if !v.is_zero() {
                entries.push(MomentEntryRaw { shift, value: rational_string(&v) });
            }
        }
    }
    let raw = MomentFileRaw {
        dims: table.grid().dims().to_vec(),
        max_order: table.max_order(),
        entries,
    };
    write_atomic(path, &to_pretty_bytes(&raw)?)
}

/// Spectra serialize support points with the cyclotomic coordinates of
/// their values (power basis of the conductor's minimal polynomial).
pub fn write_spectrum(path: &Path, fhat: &SpecFn) -> Result<()> {
    let g = fhat.grid();
    let mut entries = Vec::new();
    for i in 0..g.order() as usize {
        let point = g.element(i);
        let v = fhat.value(&point);
        if v.is_zero() {
            continue;
        }
        entries.push(SpectrumEntryRaw {
            point,
            coords: v.coords().iter().map(BigInt::to_string).collect(),
            den: v.den().to_string(),
        });
    }
    let raw = SpectrumFileRaw {
        dims: g.dims().to_vec(),
        conductor: fhat.ctx().conductor(),
        entries,
    };
    write_atomic(path, &to_pretty_bytes(&raw)?)
}

/// Exact equality of two tables on every order both sides store, compared
/// through their canonical nonzero entry lists.
pub fn tables_agree(a: &MomentTable, b: &MomentTable, through: usize) -> Result<bool> {
    for n in 1..=through {
        let mut ea = a.entries(n)?;
        let mut eb = b.entries(n)?;
        ea.retain(|(_, v)| !v.is_zero());
        eb.retain(|(_, v)| !v.is_zero());
        ea.sort_by(|x, y| x.0.cmp(&y.0));
        eb.sort_by(|x, y| x.0.cmp(&y.0));
        if ea != eb {
            return Ok(false);
        }
    }
    Ok(true)
}
