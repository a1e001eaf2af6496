//! PSPLIB single-mode (`.sm`) reader and writer.
//!
//! Job numbers are 1-based in the file; job `1` becomes activity `0` and job
//! `n+2` becomes activity `n+1`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{InstanceError, InstanceMeta, ProjectInstance};
use crate::{ActivityId, Time};

const RULE: &str = "************************************************************************";
const DASHES: &str = "------------------------------------------------------------------------";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Header,
    ProjectInfo,
    Precedence,
    Requests,
    Availability,
}

impl Section {
    fn label(self) -> &'static str {
        match self {
            Section::Header => "HEADER",
            Section::ProjectInfo => "PROJECT INFORMATION",
            Section::Precedence => "PRECEDENCE RELATIONS",
            Section::Requests => "REQUESTS/DURATIONS",
            Section::Availability => "RESOURCEAVAILABILITIES",
        }
    }
}

fn parse_err(line: usize, section: Section, message: impl Into<String>) -> InstanceError {
    InstanceError::Parse {
        line,
        section: section.label().to_string(),
        message: message.into(),
    }
}

fn int_field(token: &str, line: usize, section: Section, what: &str) -> Result<i64, InstanceError> {
    token
        .parse::<i64>()
        .map_err(|_| parse_err(line, section, format!("{what}: expected an integer, found `{token}`")))
}

fn header_value(rest: &str, line: usize) -> Result<i64, InstanceError> {
    let token = rest
        .split_whitespace()
        .next()
        .ok_or_else(|| parse_err(line, Section::Header, "missing value after `:`"))?;
    int_field(token, line, Section::Header, "header value")
}

struct JobRecord<T> {
    line: usize,
    value: T,
}

/// Parses the text of a PSPLIB single-mode file.
pub fn parse_psplib(text: &str) -> Result<ProjectInstance, InstanceError> {
    let mut section = Section::Header;
    let mut jobs: Option<usize> = None;
    let mut renewable: Option<usize> = None;
    let mut expect_table_header = false;
    let mut successors: HashMap<usize, JobRecord<Vec<usize>>> = HashMap::new();
    let mut requests: HashMap<usize, JobRecord<(Time, Vec<i64>)>> = HashMap::new();
    let mut capacities: Option<Vec<i64>> = None;
    let mut seen = [false; 3];
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with("***") || trimmed.starts_with("---") || trimmed == "RESOURCES" {
            continue;
        }
        match trimmed {
            "PROJECT INFORMATION:" => {
                section = Section::ProjectInfo;
                expect_table_header = true;
                continue;
            }
            "PRECEDENCE RELATIONS:" => {
                section = Section::Precedence;
                seen[0] = true;
                expect_table_header = true;
                continue;
            }
            "REQUESTS/DURATIONS:" => {
                section = Section::Requests;
                seen[1] = true;
                expect_table_header = true;
                continue;
            }
            "RESOURCEAVAILABILITIES:" => {
                section = Section::Availability;
                seen[2] = true;
                expect_table_header = true;
                continue;
            }
            _ => {}
        }
        if trimmed.ends_with(':') && trimmed.chars().all(|c| !c.is_lowercase()) {
            return Err(parse_err(line, section, format!("unknown section header `{trimmed}`")));
        }
        if expect_table_header {
            expect_table_header = false;
            let ok = match section {
                Section::ProjectInfo => trimmed.starts_with("pronr."),
                Section::Precedence | Section::Requests => trimmed.starts_with("jobnr."),
                Section::Availability => trimmed.starts_with('R') || trimmed.starts_with('N'),
                Section::Header => true,
            };
            if !ok {
                return Err(parse_err(line, section, format!("malformed table header `{trimmed}`")));
            }
            if section == Section::Requests {
                let columns = trimmed.split_whitespace().filter(|t| *t == "R").count();
                let nonrenewable = trimmed.split_whitespace().filter(|t| *t == "N" || *t == "D").count();
                if nonrenewable > 0 {
                    return Err(parse_err(line, section, "only renewable resources are supported"));
                }
                if let Some(r) = renewable {
                    if r != columns {
                        return Err(parse_err(
                            line,
                            section,
                            format!("table lists {columns} resources, header declared {r}"),
                        ));
                    }
                }
            }
            continue;
        }

        match section {
            Section::Header => {
                let Some((key, rest)) = trimmed.split_once(':') else {
                    return Err(parse_err(
                        line,
                        section,
                        format!("expected `key : value`, found `{trimmed}`"),
                    ));
                };
                let key = key.trim();
                if key.starts_with("jobs") {
                    let v = header_value(rest, line)?;
                    if v < 2 {
                        return Err(parse_err(line, section, "a project needs at least two jobs"));
                    }
                    jobs = Some(v as usize);
                } else if key.starts_with("- renewable") {
                    renewable = Some(header_value(rest, line)? as usize);
                } else if key.starts_with("- nonrenewable") || key.starts_with("- doubly") {
                    if header_value(rest, line)? != 0 {
                        return Err(parse_err(line, section, "only renewable resources are supported"));
                    }
                }
            }
            Section::ProjectInfo => {}
            Section::Precedence => {
                let tokens: Vec<&str> = trimmed.split_whitespace().collect();
                if tokens.len() < 3 {
                    return Err(parse_err(
                        line,
                        section,
                        "expected `jobnr. #modes #successors successors...`",
                    ));
                }
                let job = int_field(tokens[0], line, section, "job number")?;
                let modes = int_field(tokens[1], line, section, "mode count")?;
                let count = int_field(tokens[2], line, section, "successor count")?;
                if modes != 1 {
                    return Err(parse_err(
                        line,
                        section,
                        format!("job {job} has {modes} modes; only single-mode files are supported"),
                    ));
                }
                if count < 0 || tokens.len() != 3 + count as usize {
                    return Err(parse_err(
                        line,
                        section,
                        format!(
                            "job {job} declares {count} successors but lists {}",
                            tokens.len().saturating_sub(3)
                        ),
                    ));
                }
                let succ = tokens[3..]
                    .iter()
                    .map(|t| int_field(t, line, section, "successor").map(|v| v as usize))
                    .collect::<Result<Vec<_>, _>>()?;
                if job < 1 {
                    return Err(parse_err(line, section, format!("invalid job number {job}")));
                }
                if successors
                    .insert(job as usize, JobRecord { line, value: succ })
                    .is_some()
                {
                    return Err(parse_err(line, section, format!("job {job} listed twice")));
                }
            }
            Section::Requests => {
                let tokens: Vec<&str> = trimmed.split_whitespace().collect();
                let k = renewable.unwrap_or(0);
                if tokens.len() != 3 + k {
                    return Err(parse_err(
                        line,
                        section,
                        format!(
                            "expected {} fields (job, mode, duration, {k} requests), found {}",
                            3 + k,
                            tokens.len()
                        ),
                    ));
                }
                let job = int_field(tokens[0], line, section, "job number")?;
                let mode = int_field(tokens[1], line, section, "mode")?;
                if mode != 1 {
                    return Err(parse_err(line, section, format!("job {job} uses mode {mode}")));
                }
                let duration = int_field(tokens[2], line, section, "duration")?;
                let demand = tokens[3..]
                    .iter()
                    .map(|t| int_field(t, line, section, "request"))
                    .collect::<Result<Vec<_>, _>>()?;
                if job < 1 {
                    return Err(parse_err(line, section, format!("invalid job number {job}")));
                }
                if requests
                    .insert(
                        job as usize,
                        JobRecord {
                            line,
                            value: (duration, demand),
                        },
                    )
                    .is_some()
                {
                    return Err(parse_err(line, section, format!("job {job} listed twice")));
                }
            }
            Section::Availability => {
                if capacities.is_some() {
                    return Err(parse_err(line, section, "unexpected extra availability line"));
                }
                let values = trimmed
                    .split_whitespace()
                    .map(|t| int_field(t, line, section, "availability"))
                    .collect::<Result<Vec<_>, _>>()?;
                if let Some(k) = renewable {
                    if values.len() != k {
                        return Err(parse_err(
                            line,
                            section,
                            format!("expected {k} availabilities, found {}", values.len()),
                        ));
                    }
                }
                capacities = Some(values);
            }
        }
    }

    let end = last_line.max(1);
    let jobs = jobs.ok_or_else(|| parse_err(end, Section::Header, "missing `jobs (incl. supersource/sink )` line"))?;
    let renewable = renewable.ok_or_else(|| parse_err(end, Section::Header, "missing `- renewable` line"))?;
    for (flag, s) in seen
        .iter()
        .zip([Section::Precedence, Section::Requests, Section::Availability])
    {
        if !flag {
            return Err(parse_err(end, s, "section missing"));
        }
    }
    let capacities = capacities.ok_or_else(|| parse_err(end, Section::Availability, "missing availability values"))?;
    if capacities.len() != renewable {
        return Err(parse_err(end, Section::Availability, "resource count mismatch"));
    }

    let mut nominal = Vec::with_capacity(jobs);
    let mut requirements = Vec::with_capacity(jobs);
    for job in 1..=jobs {
        let rec = requests
            .get(&job)
            .ok_or_else(|| parse_err(end, Section::Requests, format!("job {job} missing")))?;
        let (duration, ref demand) = rec.value;
        if duration < 0 {
            return Err(parse_err(
                rec.line,
                Section::Requests,
                format!("job {job} has negative duration"),
            ));
        }
        for (k, (&r, &cap)) in demand.iter().zip(&capacities).enumerate() {
            if r < 0 || r > cap {
                return Err(parse_err(
                    rec.line,
                    Section::Requests,
                    format!("job {job} requests {r} units of R{} (availability {cap})", k + 1),
                ));
            }
        }
        if (job == 1 || job == jobs) && (duration != 0 || demand.iter().any(|&r| r != 0)) {
            return Err(parse_err(
                rec.line,
                Section::Requests,
                format!("dummy job {job} must have zero duration and requests"),
            ));
        }
        nominal.push(duration);
        requirements.push(demand.clone());
    }
    if let Some((&job, rec)) = requests.iter().find(|(&j, _)| j > jobs) {
        return Err(parse_err(
            rec.line,
            Section::Requests,
            format!("job {job} exceeds the declared {jobs} jobs"),
        ));
    }

    let mut arcs = Vec::new();
    let mut arc_lines: HashMap<(ActivityId, ActivityId), usize> = HashMap::new();
    for job in 1..=jobs {
        let rec = successors
            .get(&job)
            .ok_or_else(|| parse_err(end, Section::Precedence, format!("job {job} missing")))?;
        for &s in &rec.value {
            if s < 1 || s > jobs {
                return Err(parse_err(
                    rec.line,
                    Section::Precedence,
                    format!("job {job} lists unknown successor {s}"),
                ));
            }
            if s == job {
                return Err(parse_err(
                    rec.line,
                    Section::Precedence,
                    format!("cyclic precedence: job {job} succeeds itself"),
                ));
            }
            arcs.push((job - 1, s - 1));
            arc_lines.entry((job - 1, s - 1)).or_insert(rec.line);
        }
    }
    if let Some((&job, rec)) = successors.iter().find(|(&j, _)| j > jobs) {
        return Err(parse_err(
            rec.line,
            Section::Precedence,
            format!("job {job} exceeds the declared {jobs} jobs"),
        ));
    }

    let deviation = vec![0; jobs];
    ProjectInstance::new(
        nominal,
        deviation,
        requirements,
        capacities,
        arcs,
        InstanceMeta::default(),
    )
    .map_err(|e| match e {
        InstanceError::Cycle(cycle) => {
            let line = cycle
                .iter()
                .zip(cycle.iter().cycle().skip(1))
                .filter_map(|(&a, &b)| arc_lines.get(&(a, b)).copied())
                .min()
                .unwrap_or(end);
            let jobs_1based: Vec<usize> = cycle.iter().map(|a| a + 1).collect();
            parse_err(
                line,
                Section::Precedence,
                format!("cyclic precedence through jobs {jobs_1based:?}"),
            )
        }
        InstanceError::Invalid(msg) => parse_err(end, Section::Precedence, msg),
        other => other,
    })
}

/// Reads a `.sm` file and fills in the name, source path and, when the file
/// name encodes a PSPLIB parameter set, the NC/RF/RS generator parameters.
pub fn parse_psplib_file(path: impl AsRef<Path>) -> Result<ProjectInstance, InstanceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let inst = parse_psplib(&text)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let params = psplib_set_parameters(&name);
    let meta = InstanceMeta {
        network_complexity: params.map(|p| p.0),
        resource_factor: params.map(|p| p.1),
        resource_strength: params.map(|p| p.2),
        source_path: Some(path.display().to_string()),
        name,
        robustified: false,
    };
    Ok(inst.with_meta(meta))
}

/// Generator parameters `(NC, RF, RS)` of a `j30`/`j60`/`j90` file name such as
/// `j3013_4`; parameter sets run through RS fastest, then RF, then NC.
pub fn psplib_set_parameters(name: &str) -> Option<(f64, f64, f64)> {
    const NC: [f64; 3] = [1.5, 1.8, 2.1];
    const RF: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
    const RS: [f64; 4] = [0.2, 0.5, 0.7, 1.0];
    let rest = ["j30", "j60", "j90"].iter().find_map(|p| name.strip_prefix(p))?;
    let (set, _) = rest.split_once('_')?;
    let set: usize = set.parse().ok()?;
    if !(1..=48).contains(&set) {
        return None;
    }
    let idx = set - 1;
    Some((NC[idx / 16], RF[(idx / 4) % 4], RS[idx % 4]))
}

/// Writes an instance in the PSPLIB single-mode layout.
///
/// Deviations are not representable in the format and are dropped.
pub fn write_psplib(inst: &ProjectInstance) -> String {
    let jobs = inst.num_activities();
    let k = inst.num_resources();
    let horizon: Time = inst.nominal_durations().iter().sum();
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "{RULE}");
    let _ = writeln!(w, "file with basedata            : {}.bas", inst.name());
    let _ = writeln!(w, "initial value random generator: 0");
    let _ = writeln!(w, "{RULE}");
    let _ = writeln!(w, "projects                      :  1");
    let _ = writeln!(w, "jobs (incl. supersource/sink ):  {jobs}");
    let _ = writeln!(w, "horizon                       :  {horizon}");
    let _ = writeln!(w, "RESOURCES");
    let _ = writeln!(w, "  - renewable                 :  {k}   R");
    let _ = writeln!(w, "  - nonrenewable              :  0   N");
    let _ = writeln!(w, "  - doubly constrained        :  0   D");
    let _ = writeln!(w, "{RULE}");
    let _ = writeln!(w, "PROJECT INFORMATION:");
    let _ = writeln!(w, "pronr.  #jobs rel.date duedate tardcost  MPM-Time");
    let _ = writeln!(
        w,
        "    1  {:>5}      0  {:>6}        0  {:>7}",
        jobs - 2,
        horizon,
        horizon
    );
    let _ = writeln!(w, "{RULE}");
    let _ = writeln!(w, "PRECEDENCE RELATIONS:");
    let _ = writeln!(w, "jobnr.    #modes  #successors   successors");
    let mut succ: Vec<Vec<ActivityId>> = vec![Vec::new(); jobs];
    for &(i, j) in inst.arcs() {
        succ[i].push(j);
    }
    for (i, list) in succ.iter().enumerate() {
        let mut line = format!("{:>4}        1  {:>9}        ", i + 1, list.len());
        for s in list {
            let _ = write!(line, "{:>4}", s + 1);
        }
        let _ = writeln!(w, "{}", line.trim_end());
    }
    let _ = writeln!(w, "{RULE}");
    let _ = writeln!(w, "REQUESTS/DURATIONS:");
    let mut header = String::from("jobnr. mode duration");
    for r in 1..=k {
        let _ = write!(header, "  R {r}");
    }
    let _ = writeln!(w, "{header}");
    let _ = writeln!(w, "{DASHES}");
    for i in inst.activities() {
        let mut line = format!("{:>3}{:>7}{:>6}", i + 1, 1, inst.nominal(i));
        for (idx, r) in inst.requirements(i).iter().enumerate() {
            let width = if idx == 0 { 8 } else { 5 };
            let _ = write!(line, "{r:>width$}");
        }
        let _ = writeln!(w, "{line}");
    }
    let _ = writeln!(w, "{RULE}");
    let _ = writeln!(w, "RESOURCEAVAILABILITIES:");
    let mut names = String::new();
    let mut values = String::new();
    for (idx, cap) in inst.capacities().iter().enumerate() {
        let _ = write!(names, "  R {}", idx + 1);
        let _ = write!(values, "{cap:>5}");
    }
    let _ = writeln!(w, "{names}");
    let _ = writeln!(w, "{values}");
    let _ = writeln!(w, "{RULE}");
    out
}
