//! Plain-text CSV form of a point set.
//!
//! ```text
//! dim=2,time,radius
//! 1.0000000000000000e-1,2.5000000000000000e-1,4.0e-1,5.0e-2
//! ```
//!
//! The header names the dimension and, optionally, which mark columns follow
//! the coordinates. Floats are written with 17 significant digits, which
//! round-trips every finite `f64` exactly.

use std::io::{BufRead, Write};

use super::{Mark, Point, PointSet, MAX_DIM};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn write_point_set<W: Write>(x: &PointSet, mut out: W) -> Result<()> {
    let (times, radii) = match x.marks() {
        Some(m) => {
            let t = m.iter().filter(|k| k.time.is_some()).count();
            let r = m.iter().filter(|k| k.radius.is_some()).count();
            if (t != 0 && t != m.len()) || (r != 0 && r != m.len()) {
                return Err(Error::Parameter(
                    "cannot serialize a point set with partially present marks".into(),
                ));
            }
            (t != 0, r != 0)
        }
        None => (false, false),
    };
    write!(out, "dim={}", x.dim())?;
    if times {
        write!(out, ",time")?;
    }
    if radii {
        write!(out, ",radius")?;
    }
    writeln!(out)?;
    for (i, p) in x.points().iter().enumerate() {
        let mut fields: Vec<String> = p.coords().iter().map(|c| format!("{c:.16e}")).collect();
        if let Some(m) = x.mark(i) {
            if let Some(t) = m.time.filter(|_| times) {
                fields.push(format!("{t:.16e}"));
            }
            if let Some(r) = m.radius.filter(|_| radii) {
                fields.push(format!("{r:.16e}"));
            }
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn read_point_set<R: BufRead>(input: R) -> Result<PointSet> {
    let mut lines = input.lines().enumerate();
    let (dim, times, radii) = loop {
        let Some((i, line)) = lines.next() else {
            return Err(parse_err(1, "missing header 'dim=<d>'"));
        };
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        break parse_header(line).map_err(|m| parse_err(i + 1, m))?;
    };

    let width = dim + times as usize + radii as usize;
    let mut points = Vec::new();
    let mut marks = Vec::new();
    for (i, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != width {
            return Err(parse_err(
                i + 1,
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        let mut vals = [0.0; MAX_DIM + 2];
        for (k, f) in fields.iter().enumerate() {
            vals[k] = f
                .parse::<f64>()
                .map_err(|e| parse_err(i + 1, format!("field {}: '{f}': {e}", k + 1)))?;
        }
        let p = Point::new(&vals[..dim]).map_err(|e| parse_err(i + 1, e.to_string()))?;
        let mut mark = Mark::default();
        let mut k = dim;
        if times {
            mark.time = Some(vals[k]);
            k += 1;
        }
        if radii {
            mark.radius = Some(vals[k]);
        }
        mark.validate()
            .map_err(|e| parse_err(i + 1, e.to_string()))?;
        points.push(p);
        marks.push(mark);
    }
    if times || radii {
        PointSet::with_marks(dim, points, marks)
    } else {
        PointSet::new(dim, points)
    }
}

fn parse_header(line: &str) -> std::result::Result<(usize, bool, bool), String> {
    let mut parts = line.split(',').map(str::trim);
    let first = parts.next().unwrap_or_default();
    let dim = first
        .strip_prefix("dim=")
        .ok_or_else(|| format!("header must start with 'dim=', found '{first}'"))?
        .parse::<usize>()
        .map_err(|e| format!("bad dimension: {e}"))?;
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(format!("dimension {dim} not in 1..=3"));
    }
    let (mut times, mut radii) = (false, false);
    for col in parts {
        match col {
            "time" if !times && !radii => times = true,
            "radius" if !radii => radii = true,
            other => return Err(format!("unexpected header column '{other}'")),
        }
    }
    Ok((dim, times, radii))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_process::{
        attach_marks, sample_homogeneous_poisson, MarkLaw, RadiusLaw, Window,
    };
    use crate::RngStream;

    fn roundtrip(x: &PointSet) -> PointSet {
        let mut buf = Vec::new();
        write_point_set(x, &mut buf).unwrap();
        read_point_set(buf.as_slice()).unwrap()
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let mut rng = RngStream::new(99, 0).rng();
        for d in 1..=3 {
            let x = sample_homogeneous_poisson(50.0, &Window::unit_cube(d), &mut rng).unwrap();
            assert_eq!(roundtrip(&x), x);
            let law = MarkLaw {
                time: true,
                radius: Some(RadiusLaw::Uniform { lo: 0.0, hi: 0.3 }),
            };
            let m = attach_marks(&x, &law, &mut rng).unwrap();
            assert_eq!(roundtrip(&m), m);
            let r = attach_marks(
                &x,
                &MarkLaw::radii(RadiusLaw::Constant { value: 0.1 }),
                &mut rng,
            )
            .unwrap();
            assert_eq!(roundtrip(&r), r);
        }
        let tiny =
            PointSet::from_coords(1, &[&[f64::MIN_POSITIVE], &[-1e300], &[0.1 + 0.2]]).unwrap();
        assert_eq!(roundtrip(&tiny), tiny);
    }

    #[test]
    fn header_is_dim() {
        let x = PointSet::from_coords(2, &[&[0.5, 0.25]]).unwrap();
        let mut buf = Vec::new();
        write_point_set(&x, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("dim=2\n"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "dim=2\n0.1,0.2\n0.3\n";
        match read_point_set(bad.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let bad = "dim=1\n0.1\nabc\n";
        assert!(matches!(
            read_point_set(bad.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            read_point_set("x=1\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_point_set("dim=1,time\n0.5,2.0\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(read_point_set("dim=1\n0.5\n0.5\n".as_bytes()).is_err());
    }
}
