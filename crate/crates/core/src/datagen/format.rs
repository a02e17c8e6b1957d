//! Line-oriented instance files.
//!
//! ```text
//! IVOTE v1 <model_tag> d=<d>
//! MAP <lo_1> <hi_1> .. <lo_d> <hi_d>
//! META noise=<sigma> seed=<seed> [f0=<f0>]
//! N <item count>
//! <item records>
//! GT <p_1> .. <p_d>           (optional)
//! GTI <id> <id> ..            (optional, after GT)
//! ```
//!
//! Item records by family: `P x_1 .. x_m` for line2 (m = 2) and hyperplane
//! (m = d); `C w1 w2 w3 xi eta` for the pose families; `R a b c d` for ray3;
//! `M px py qx qy` for sim2. Blank lines and text after `#` are ignored.
//! Numbers are written in shortest round-trip form, so save then load is
//! lossless.

use std::fmt::Write as _;
use std::path::Path;

use super::{GroundTruth, Items, ProblemInstance};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::surface::{ModelTag, SpaceMap};
use crate::surfaces::{Correspondence, Ray3};

const MAGIC: &str = "IVOTE";
const VERSION: &str = "v1";

fn num<T: Scalar>(out: &mut String, v: T) {
    let _ = write!(out, " {}", v.to_f64_lossy());
}

fn nums<T: Scalar>(out: &mut String, tag: &str, vs: &[T]) {
    out.push_str(tag);
    for &v in vs {
        num(out, v);
    }
    out.push('\n');
}

/// Serializes `inst` to the text format.
pub fn write_instance<T: Scalar>(inst: &ProblemInstance<T>) -> String {
    let d = inst.dim();
    let mut out = format!("{MAGIC} {VERSION} {} d={d}\n", inst.model_tag);
    let map: Vec<T> = inst
        .space_map
        .lo
        .iter()
        .zip(&inst.space_map.hi)
        .flat_map(|(&a, &b)| [a, b])
        .collect();
    nums(&mut out, "MAP", &map);
    let _ = write!(out, "META noise={} seed={}", inst.noise_sigma.to_f64_lossy(), inst.seed);
    if let Some(f0) = inst.f0 {
        let _ = write!(out, " f0={}", f0.to_f64_lossy());
    }
    let _ = writeln!(out, "\nN {}", inst.len());
    match &inst.items {
        Items::Points(ps) => ps.iter().for_each(|p| nums(&mut out, "P", p)),
        Items::Correspondences(cs) => cs
            .iter()
            .for_each(|c| nums(&mut out, "C", &[c.w[0], c.w[1], c.w[2], c.xi, c.eta])),
        Items::Rays(rs) => rs.iter().for_each(|r| nums(&mut out, "R", &[r.a, r.b, r.c, r.d])),
        Items::Pairs(ps) => ps
            .iter()
            .for_each(|(p, q)| nums(&mut out, "M", &[p[0], p[1], q[0], q[1]])),
    }
    if let Some(gt) = &inst.ground_truth {
        nums(&mut out, "GT", &gt.params);
        out.push_str("GTI");
        for id in &gt.inlier_ids {
            let _ = write!(out, " {id}");
        }
        out.push('\n');
    }
    out
}

pub fn save_instance<T: Scalar>(inst: &ProblemInstance<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_instance(inst))?;
    Ok(())
}

pub fn load_instance<T: Scalar>(path: impl AsRef<Path>) -> Result<ProblemInstance<T>> {
    parse_instance(&std::fs::read_to_string(path)?)
}

struct Line<'a> {
    no: usize,
    words: Vec<&'a str>,
}

impl Line<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.no,
            msg: msg.into(),
        }
    }

    fn value<T: Scalar>(&self, s: &str) -> Result<T> {
        let v: f64 = s
            .parse()
            .map_err(|_| self.err(format!("`{s}` is not a number")))?;
        if !v.is_finite() {
            return Err(self.err(format!("non-finite value `{s}`")));
        }
        T::from_f64(v).ok_or_else(|| self.err(format!("`{s}` does not fit the scalar type")))
    }

    /// The numeric fields after the record tag, which must number `n`.
    fn fields<T: Scalar>(&self, n: usize) -> Result<Vec<T>> {
        let rest = &self.words[1..];
        if rest.len() != n {
            return Err(self.err(format!(
                "{} record needs {n} fields, found {}",
                self.words[0],
                rest.len()
            )));
        }
        rest.iter().map(|s| self.value(s)).collect()
    }

    fn key<'b>(&self, word: &'b str, key: &str) -> Result<&'b str> {
        word.strip_prefix(key)
            .and_then(|w| w.strip_prefix('='))
            .ok_or_else(|| self.err(format!("expected `{key}=...`, found `{word}`")))
    }

    fn expect_tag(&self, tag: &str) -> Result<()> {
        if self.words[0] != tag {
            return Err(self.err(format!("expected {tag} record, found `{}`", self.words[0])));
        }
        Ok(())
    }
}

fn record_tag(tag: ModelTag) -> &'static str {
    match tag {
        ModelTag::Line2 | ModelTag::Hyperplane => "P",
        ModelTag::Ray3 => "R",
        ModelTag::Sim2 => "M",
        _ => "C",
    }
}

/// Parses the text format. Errors carry 1-based line numbers; a missing
/// record at end of input names the line after the last one.
pub fn parse_instance<T: Scalar>(text: &str) -> Result<ProblemInstance<T>> {
    let mut lines = text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let words: Vec<&str> = l.split_whitespace().collect();
        (!words.is_empty()).then_some(Line { no: i + 1, words })
    });
    let eof = text.lines().count() + 1;
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| Error::Parse {
            line: eof,
            msg: format!("unexpected end of input, expected {what}"),
        })
    };

    let head = next("header")?;
    if head.words.len() != 4 || head.words[0] != MAGIC {
        return Err(head.err(format!("expected `{MAGIC} {VERSION} <model_tag> d=<d>`")));
    }
    if head.words[1] != VERSION {
        return Err(head.err(format!("unsupported version `{}`", head.words[1])));
    }
    let tag: ModelTag = head.words[2]
        .parse()
        .map_err(|_| head.err(format!("unknown model tag `{}`", head.words[2])))?;
    let d: usize = head
        .key(head.words[3], "d")?
        .parse()
        .map_err(|_| head.err("bad dimension"))?;
    let expected = tag.expected_dims(d).d;
    if d != expected || d < 2 {
        return Err(head.err(format!("{tag} needs d={expected}, found d={d}")));
    }

    let map = next("MAP")?;
    map.expect_tag("MAP")?;
    let bounds: Vec<T> = map.fields(2 * d)?;
    let space_map = SpaceMap::new(
        bounds.iter().step_by(2).copied().collect(),
        bounds.iter().skip(1).step_by(2).copied().collect(),
    )
    .map_err(|e| map.err(e.to_string()))?;

    let meta = next("META")?;
    meta.expect_tag("META")?;
    if !(3..=4).contains(&meta.words.len()) {
        return Err(meta.err("META takes noise=, seed= and optional f0="));
    }
    let noise_sigma: T = meta.value(meta.key(meta.words[1], "noise")?)?;
    let seed: u64 = meta
        .key(meta.words[2], "seed")?
        .parse()
        .map_err(|_| meta.err("bad seed"))?;
    let f0 = match meta.words.get(3) {
        Some(w) => Some(meta.value::<T>(meta.key(w, "f0")?)?),
        None => None,
    };

    let count = next("N")?;
    count.expect_tag("N")?;
    if count.words.len() != 2 {
        return Err(count.err("N takes one count"));
    }
    let n: usize = count.words[1]
        .parse()
        .map_err(|_| count.err("bad item count"))?;

    let rec = record_tag(tag);
    let width = match tag {
        ModelTag::Line2 => 2,
        ModelTag::Hyperplane => d,
        ModelTag::Ray3 | ModelTag::Sim2 => 4,
        _ => 5,
    };
    let mut raw = Vec::with_capacity(n.min(1 << 24));
    for k in 0..n {
        let l = next(&format!("item {} of {n}", k + 1))?;
        l.expect_tag(rec)?;
        raw.push(l.fields::<T>(width)?);
    }
    let items = match tag {
        ModelTag::Line2 | ModelTag::Hyperplane => Items::Points(raw),
        ModelTag::Ray3 => Items::Rays(
            raw.into_iter()
                .map(|v| Ray3 { a: v[0], b: v[1], c: v[2], d: v[3] })
                .collect(),
        ),
        ModelTag::Sim2 => {
            Items::Pairs(raw.into_iter().map(|v| ([v[0], v[1]], [v[2], v[3]])).collect())
        }
        _ => Items::Correspondences(
            raw.into_iter()
                .map(|v| Correspondence::new([v[0], v[1], v[2]], v[3], v[4]))
                .collect(),
        ),
    };

    let mut ground_truth = None;
    if let Some(l) = lines.next() {
        l.expect_tag("GT")?;
        let params = l.fields::<T>(d)?;
        let ids = lines.next().ok_or_else(|| Error::Parse {
            line: eof,
            msg: "unexpected end of input, expected GTI".into(),
        })?;
        ids.expect_tag("GTI")?;
        let mut inlier_ids = ids.words[1..]
            .iter()
            .map(|s| match s.parse::<u32>() {
                Ok(i) if (i as usize) < n => Ok(i),
                _ => Err(ids.err(format!("bad inlier id `{s}`"))),
            })
            .collect::<Result<Vec<u32>>>()?;
        inlier_ids.sort_unstable();
        ground_truth = Some(GroundTruth { params, inlier_ids });
        if let Some(extra) = lines.next() {
            return Err(extra.err(format!("unexpected `{}` after GTI", extra.words[0])));
        }
    }

    Ok(ProblemInstance {
        model_tag: tag,
        items,
        ground_truth,
        noise_sigma,
        seed,
        space_map,
        f0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{gen_alignment_instance, gen_line_instance, gen_pose_instance, gen_ray_instance, AlignmentBracket};

    fn round_trip(inst: &ProblemInstance<f64>) {
        let text = write_instance(inst);
        let back: ProblemInstance<f64> = parse_instance(&text).unwrap();
        assert_eq!(&back, inst);
    }

    #[test]
    fn round_trips() {
        round_trip(&gen_line_instance(40, 0.3, 0.01, 1).unwrap());
        round_trip(&gen_ray_instance(20, 4, 1).unwrap());
        round_trip(&gen_alignment_instance(20, 0.5, AlignmentBracket::default(), 1).unwrap());
        round_trip(&gen_pose_instance(ModelTag::Pose7, 20, 2, 0.5, 0.1, 1).unwrap());
        let mut no_gt = gen_line_instance(5, 0.3, 0.01, 1).unwrap();
        no_gt.ground_truth = None;
        round_trip(&no_gt);
    }

    #[test]
    fn hand_written() {
        let text = "# three points\nIVOTE v1 line2 d=2\nMAP 0 1 0 1\nMETA noise=0 seed=0\nN 3\n\
                    P 0 0.5\nP 0.5 0.75  # on y = x/2 + 1/2\nP 1 1\n";
        let inst: ProblemInstance<f64> = parse_instance(text).unwrap();
        assert_eq!(inst.len(), 3);
        assert!(inst.ground_truth.is_none());
    }

    fn line_of(text: &str) -> usize {
        match parse_instance::<f64>(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_lines() {
        let good = write_instance(&gen_line_instance(4, 0.5, 0.0, 2).unwrap());
        let lines: Vec<&str> = good.lines().collect();
        // Truncated before the last item.
        assert_eq!(line_of(&lines[..6].join("\n")), 7);
        assert_eq!(line_of(&good.replacen("v1", "v2", 1)), 1);
        assert_eq!(line_of(&good.replacen("line2", "circle", 1)), 1);
        let bad = good.replace(lines[5], "P 0.1 NaN");
        assert_eq!(line_of(&bad), 6);
        let bad = good.replace(lines[5], "P 0.1");
        assert_eq!(line_of(&bad), 6);
        let bad = good.replace(lines[5], "C 0 0 0 0 0");
        assert_eq!(line_of(&bad), 6);
    }
}
