//! Scene plan document.
//!
//! ```text
//! navscene 1
//! floor <height>
//! ceiling <height>
//! wall x|y|z <coord> <a-min> <a-max> <b-min> <b-max>
//! ```
//!
//! A wall lies in the plane `axis = coord` and spans the two ranges along
//! the remaining axes in x/y/z order. `floor` and `ceiling` appear exactly
//! once; walls may repeat. Numbers are written in shortest round-trip form.

use std::path::Path;

use super::{read_text, write_bytes, IoError};
use crate::sim_world::{Axis, ScenePlan, Wall};

pub const SCENE_HEADER: &str = "navscene";
pub const SCENE_VERSION: u32 = 1;

fn parse_err(line: usize, reason: impl Into<String>) -> IoError {
    IoError::ParseError {
        line,
        reason: reason.into(),
    }
}

fn num(line: usize, token: &str) -> Result<f64, IoError> {
    let v: f64 = token
        .parse()
        .map_err(|_| parse_err(line, format!("{token:?} is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{token:?} is not finite")));
    }
    Ok(v)
}

pub fn parse_scene(text: &str) -> Result<ScenePlan, IoError> {
    let mut saw_header = false;
    let mut floor = None;
    let mut ceiling = None;
    let mut walls = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if !saw_header {
            let [SCENE_HEADER, v] = tokens.as_slice() else {
                return Err(parse_err(line, format!("expected `{SCENE_HEADER} {SCENE_VERSION}`")));
            };
            let version: u32 = v.parse().map_err(|_| parse_err(line, format!("bad version {v:?}")))?;
            if version != SCENE_VERSION {
                return Err(IoError::VersionUnsupported(version));
            }
            saw_header = true;
            continue;
        }
        match tokens.as_slice() {
            ["floor", v] => {
                if floor.replace(num(line, v)?).is_some() {
                    return Err(parse_err(line, "floor given twice"));
                }
            }
            ["ceiling", v] => {
                if ceiling.replace(num(line, v)?).is_some() {
                    return Err(parse_err(line, "ceiling given twice"));
                }
            }
            ["wall", axis, rest @ ..] if rest.len() == 5 => {
                let axis = match *axis {
                    "x" => Axis::X,
                    "y" => Axis::Y,
                    "z" => Axis::Z,
                    other => return Err(parse_err(line, format!("unknown axis {other:?}"))),
                };
                let v: Vec<f64> = rest.iter().map(|t| num(line, t)).collect::<Result<_, _>>()?;
                walls.push(Wall {
                    axis,
                    coord: v[0],
                    range_a: (v[1], v[2]),
                    range_b: (v[3], v[4]),
                });
            }
            _ => return Err(parse_err(line, format!("unrecognized record {content:?}"))),
        }
    }
    if !saw_header {
        return Err(parse_err(0, "empty document"));
    }
    let plan = ScenePlan {
        floor_height: floor.ok_or_else(|| IoError::InvariantViolation("floor missing".into()))?,
        ceiling_height: ceiling.ok_or_else(|| IoError::InvariantViolation("ceiling missing".into()))?,
        walls,
    };
    plan.validate()
        .map_err(|e| IoError::InvariantViolation(e.to_string()))?;
    Ok(plan)
}

pub fn format_scene(plan: &ScenePlan) -> String {
    let mut out = format!(
        "{SCENE_HEADER} {SCENE_VERSION}\nfloor {:?}\nceiling {:?}\n",
        plan.floor_height, plan.ceiling_height
    );
    for w in &plan.walls {
        let axis = match w.axis {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        };
        out.push_str(&format!(
            "wall {axis} {:?} {:?} {:?} {:?} {:?}\n",
            w.coord, w.range_a.0, w.range_a.1, w.range_b.0, w.range_b.1
        ));
    }
    out
}

pub fn load_scene(path: &Path) -> Result<ScenePlan, IoError> {
    parse_scene(&read_text(path)?)
}

pub fn save_scene(plan: &ScenePlan, path: &Path) -> Result<(), IoError> {
    write_bytes(path, format_scene(plan).as_bytes())
}
