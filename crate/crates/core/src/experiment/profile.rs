use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{ExperimentError, ResultRecord};

/// Times below this are treated as equal to it, so ratios stay finite.
const TIME_FLOOR: f64 = 1e-6;

/// Performance profile over instances keyed by `(name, Γ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceProfile {
    pub variants: Vec<String>,
    pub instances: Vec<(String, usize)>,
    /// `ratios[v][i]`: ratio of variant `v` on instance `i`; `None` if unsolved.
    pub ratios: Vec<Vec<Option<f64>>>,
    /// Ratio assigned to unsolved pairs.
    pub failure_ratio: f64,
    /// Distinct finite ratios, ascending.
    pub taus: Vec<f64>,
}

impl PerformanceProfile {
    /// `p_im`, with `P` for unsolved pairs.
    pub fn ratio(&self, variant: usize, instance: usize) -> f64 {
        self.ratios[variant][instance].unwrap_or(self.failure_ratio)
    }

    /// Fraction of instances on which `variant` is within `tau` of the best.
    pub fn rho(&self, variant: usize, tau: f64) -> f64 {
        let n = self.instances.len();
        if n == 0 {
            return 0.0;
        }
        let hits = (0..n).filter(|&i| self.ratio(variant, i) <= tau).count();
        hits as f64 / n as f64
    }

    pub fn variant_index(&self, name: &str) -> Option<usize> {
        self.variants.iter().position(|v| v == name)
    }

    /// `tau,<variant>...` with one row per sample point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau");
        for v in &self.variants {
            out.push(',');
            out.push_str(v);
        }
        out.push('\n');
        for &tau in &self.taus {
            let _ = write!(out, "{tau}");
            for v in 0..self.variants.len() {
                let _ = write!(out, ",{}", self.rho(v, tau));
            }
            out.push('\n');
        }
        out
    }

    /// Step plot of every `ρ_m` on `[1, P]`, log-scaled in `τ`.
    pub fn to_svg(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 400.0;
        const PAD: f64 = 50.0;
        const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
        let p = self.failure_ratio.max(1.0 + 1e-9);
        let span = p.ln().max(1e-9);
        let x = |tau: f64| PAD + (W - 2.0 * PAD) * (tau.max(1.0).ln() / span).min(1.0);
        let y = |rho: f64| H - PAD - (H - 2.0 * PAD) * rho;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<path d="M{PAD},{top} V{bottom} H{right}" stroke="black" fill="none"/>"#,
            top = PAD,
            bottom = H - PAD,
            right = W - PAD
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">tau (log scale, P = {})</text>"#,
            W / 2.0,
            H - 15.0,
            fmt_num(self.failure_ratio)
        );
        for (label, rho) in [("0", 0.0), ("0.5", 0.5), ("1", 1.0)] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{label}</text>"#,
                PAD - 6.0,
                y(rho) + 4.0
            );
        }
        for (v, name) in self.variants.iter().enumerate() {
            let color = COLORS[v % COLORS.len()];
            let mut d = format!("M{:.2},{:.2}", x(1.0), y(self.rho(v, 1.0)));
            for &tau in self.taus.iter().filter(|&&t| t > 1.0) {
                let _ = write!(d, " H{:.2} V{:.2}", x(tau), y(self.rho(v, tau)));
            }
            let _ = write!(d, " H{:.2}", x(p));
            let _ = writeln!(s, r#"<path d="{d}" stroke="{color}" stroke-width="2" fill="none"/>"#);
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="12" fill="{color}">{name}</text>"#,
                W - PAD + 4.0 - 100.0,
                PAD + 16.0 * (v as f64 + 1.0)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn fmt_num(x: f64) -> String {
    let r = (x * 1000.0).round() / 1000.0;
    format!("{r}")
}

/// Builds the profile of `variants` over every `(instance, Γ)` that occurs in
/// `records`. Each pair needs exactly one record per variant.
pub fn performance_profile(
    records: &[ResultRecord],
    variants: &[String],
) -> Result<PerformanceProfile, ExperimentError> {
    let mut table: BTreeMap<(String, usize), Vec<Option<&ResultRecord>>> = BTreeMap::new();
    for r in records {
        let Some(v) = variants.iter().position(|x| *x == r.variant) else {
            continue;
        };
        let row = table
            .entry((r.instance.clone(), r.gamma))
            .or_insert_with(|| vec![None; variants.len()]);
        if row[v].is_some() {
            return Err(ExperimentError::Records(
                "duplicate",
                r.instance.clone(),
                r.gamma,
                r.variant.clone(),
            ));
        }
        row[v] = Some(r);
    }
    let mut instances = Vec::with_capacity(table.len());
    let mut ratios = vec![Vec::with_capacity(table.len()); variants.len()];
    for ((name, gamma), row) in table {
        let mut times = Vec::with_capacity(variants.len());
        for (v, rec) in row.iter().enumerate() {
            let Some(rec) = rec else {
                return Err(ExperimentError::Records("missing", name, gamma, variants[v].clone()));
            };
            times.push(rec.is_solved().then_some(rec.time_s.max(TIME_FLOOR)));
        }
        let best = times.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        for (v, t) in times.into_iter().enumerate() {
            ratios[v].push(t.map(|t| t / best));
        }
        instances.push((name, gamma));
    }
    let mut taus: Vec<f64> = ratios.iter().flatten().flatten().copied().collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let failure_ratio = 2.0 * taus.last().copied().unwrap_or(1.0);
    Ok(PerformanceProfile {
        variants: variants.to_vec(),
        instances,
        ratios,
        failure_ratio,
        taus,
    })
}
