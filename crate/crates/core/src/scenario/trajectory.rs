//! JSON-lines trajectory files, one frame per line.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{FrameDiagnostics, FrameRecord, ObjectRecord, Trajectory};
use crate::math::{Pose, Quat, SpatialVelocity, Vec3};
use crate::Error;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkLine {
    pos: Vec3,
    quat: Quat,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectLine {
    name: String,
    pos: Vec3,
    quat: Quat,
    lin_vel: Vec3,
    ang_vel: Vec3,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameLine {
    frame: usize,
    time: f64,
    root_pos: Vec3,
    root_quat: Quat,
    joints: Vec<Quat>,
    links: Vec<LinkLine>,
    objects: Vec<ObjectLine>,
}

impl From<&FrameRecord> for FrameLine {
    fn from(r: &FrameRecord) -> Self {
        FrameLine {
            frame: r.frame,
            time: r.time,
            root_pos: r.root.position,
            root_quat: r.root.orientation,
            joints: r.joints.clone(),
            links: r.links.iter().map(|p| LinkLine { pos: p.position, quat: p.orientation }).collect(),
            objects: r
                .objects
                .iter()
                .map(|o| ObjectLine {
                    name: o.name.clone(),
                    pos: o.pose.position,
                    quat: o.pose.orientation,
                    lin_vel: o.velocity.linear,
                    ang_vel: o.velocity.angular,
                })
                .collect(),
        }
    }
}

impl From<FrameLine> for FrameRecord {
    fn from(l: FrameLine) -> Self {
        FrameRecord {
            frame: l.frame,
            time: l.time,
            root: Pose::new(l.root_pos, l.root_quat),
            joints: l.joints,
            links: l.links.into_iter().map(|p| Pose::new(p.pos, p.quat)).collect(),
            objects: l
                .objects
                .into_iter()
                .map(|o| ObjectRecord {
                    name: o.name,
                    pose: Pose::new(o.pos, o.quat),
                    velocity: SpatialVelocity::new(o.lin_vel, o.ang_vel),
                })
                .collect(),
        }
    }
}

/// Writes one JSON object per frame. Floats use the shortest decimal form
/// that parses back to the same value.
pub fn write_trajectory_to<W: Write>(traj: &Trajectory, out: W) -> Result<(), Error> {
    let mut out = BufWriter::new(out);
    for rec in &traj.records {
        serde_json::to_writer(&mut out, &FrameLine::from(rec)).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trajectory(traj: &Trajectory, path: &Path) -> Result<(), Error> {
    write_trajectory_to(traj, std::fs::File::create(path)?)
}

/// Reads a trajectory written by [`write_trajectory`]. Blank lines are
/// skipped; diagnostics are not stored and come back as defaults.
pub fn read_trajectory_from<R: Read>(input: R) -> Result<Trajectory, Error> {
    let mut traj = Trajectory::default();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: FrameLine = serde_json::from_str(&line)
            .map_err(|e| Error::MalformedTrajectory { line: i + 1, message: e.to_string() })?;
        traj.records.push(parsed.into());
        traj.diagnostics.push(FrameDiagnostics::default());
    }
    Ok(traj)
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory, Error> {
    read_trajectory_from(std::fs::File::open(path)?)
}
