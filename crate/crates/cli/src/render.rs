use std::fmt::Write;

use hyperdisp_core::classify::{AxisKind, ContactOrder, HessianKind, RootClass, ZoneKind, ZoneReport};
use hyperdisp_core::symbols::corpus::CorpusEntry;

use crate::commands::{AnalyzeOutput, CorpusShow, SimulateOutput, Verdict, VerifyReport};

fn order(o: &ContactOrder) -> String {
    match o {
        ContactOrder::Finite(k) => k.to_string(),
        ContactOrder::Infinite => "inf".into(),
    }
}

fn zone_kind(k: &ZoneKind) -> String {
    match k {
        ZoneKind::Excluded => "excluded".into(),
        ZoneKind::Multiplicity { set } => format!("multiplicity #{set}"),
        ZoneKind::Contact { label } => format!("contact (root {label})"),
        ZoneKind::Bounded => "bounded".into(),
        ZoneKind::Large => "large".into(),
    }
}

fn root_summary(rc: &RootClass) -> String {
    let mut s = match &rc.axis.kind {
        AxisKind::Separated { delta } => format!("away from axis, delta={delta:.4}"),
        AxisKind::OnAxis => "on axis".into(),
        AxisKind::MeetsFiniteOrder { s, s1, contact, .. } => {
            let mut t = format!("meets axis, s={s}");
            if let Some(s1) = s1 {
                let _ = write!(t, ", s1={s1}");
            }
            if contact.at_origin {
                t.push_str(", at 0");
            }
            t
        }
        AxisKind::Unclassified { reason } => format!("unclassified ({reason})"),
    };
    if let Some(h) = &rc.hessian {
        match &h.kind {
            HessianKind::NonDegenerate { m_exponent } => {
                s.push_str(", Hess non-degenerate");
                if let Some(m) = m_exponent {
                    let _ = write!(s, " M={m:.2}");
                }
            }
            HessianKind::RankDeficient { rank } => {
                let _ = write!(s, ", Hess rank {rank}");
            }
            HessianKind::Degenerate => s.push_str(", Hess degenerate"),
        }
    }
    if let Some(c) = &rc.contact {
        let _ = write!(
            s,
            ", {} gamma={} gamma0={}",
            if c.convex { "convex" } else { "non-convex" },
            order(&c.gamma),
            order(&c.gamma0)
        );
    }
    if rc.axis.low_confidence {
        s.push_str(" [low confidence]");
    }
    s
}

pub fn zone_table(report: &ZoneReport) -> String {
    let mut out = String::new();
    let st = &report.analyzed_stability;
    let _ = writeln!(
        out,
        "stability: {} (min Im tau = {:.3e} at xi = {:?}, root {})",
        if st.stable { "stable" } else { "UNSTABLE" },
        st.min_im + 0.0,
        st.argmin,
        st.label
    );
    for (i, m) in report.multiplicities.iter().enumerate() {
        let _ = writeln!(
            out,
            "multiplicity #{i}: roots {:?}, L={}, codimension {}, {} node(s){}",
            m.labels,
            m.multiplicity,
            m.codimension,
            m.nodes.len(),
            if m.contains_axis { ", on axis" } else { "" }
        );
    }
    let _ = writeln!(out, "{:<4} {:<20} {:>8} {:>17}  roots", "zone", "kind", "nodes", "|xi| range");
    for z in &report.zones {
        let range = format!("[{:.3}, {:.3}]", z.radius_range.0, z.radius_range.1);
        let _ = writeln!(out, "{:<4} {:<20} {:>8} {:>17}", z.id, zone_kind(&z.kind), z.node_count, range);
        for rc in &z.roots {
            let _ = writeln!(out, "       root {}: {}", rc.label, root_summary(rc));
        }
    }
    out
}

pub fn analyze_text(a: &AnalyzeOutput) -> String {
    let r = &a.report;
    let mut out = format!(
        "symbol {} (n = {}, m = {}{})\n",
        a.symbol,
        r.dimension,
        r.order,
        if r.homogeneous { ", homogeneous" } else { "" }
    );
    out.push_str(&zone_table(r));
    let _ = writeln!(
        out,
        "\n{:<12} {:>2} {:>4}  {:<18} {:>6}  {:<22} {:>4}  strichartz (q, q')",
        "(p, q)", "r", "|a|", "K(t)", "kappa", "row", "zone"
    );
    for p in &a.predictions {
        match (&p.prediction, &p.abstained) {
            (Some(d), _) => {
                let strichartz = d
                    .strichartz
                    .as_ref()
                    .and_then(|s| Some(format!("({}, {})", s.q.as_ref()?, s.q_prime.as_ref()?)))
                    .unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    out,
                    "{:<12} {:>2} {:>4}  {:<18} {:>6}  {:<22} {:>4}  {}",
                    p.pair.to_string(),
                    p.r,
                    p.alpha,
                    d.k.describe(),
                    d.kappa.to_string(),
                    format!("{:?}", d.k.row),
                    d.k.zone.map(|z| z.to_string()).unwrap_or_else(|| "-".into()),
                    strichartz
                );
                for q in &d.qualified {
                    let _ = writeln!(
                        out,
                        "{:<12} {:>2} {:>4}  {:<18} {:>6}  {:<22} {:>4}  shrinking region only",
                        "",
                        "",
                        "",
                        q.describe(),
                        q.kappa().to_string(),
                        format!("{:?}", q.row),
                        q.zone.map(|z| z.to_string()).unwrap_or_else(|| "-".into()),
                    );
                }
            }
            (None, Some(why)) => {
                let _ = writeln!(out, "{:<12} {:>2} {:>4}  abstained: {why}", p.pair.to_string(), p.r, p.alpha);
            }
            (None, None) => {}
        }
    }
    if let Some(fp) = &a.strong_stability {
        let _ = writeln!(out, "\nstrongly stable: K(t) = {}", fp.envelope);
    }
    out
}

pub fn simulate_text(s: &SimulateOutput) -> String {
    let run = &s.run;
    let mut out = format!(
        "symbol {}: {} times, grid {}^{} on |xi| <= {}, r = {}, alpha = {:?}\n",
        run.symbol,
        run.samples.len(),
        run.grid.count,
        run.grid.dimension,
        run.grid.radius,
        run.r,
        run.alpha
    );
    let _ = writeln!(out, "{:<18} {:>4} {:>10} {:>10} {:>6}", "measure", "q", "exponent", "+/-", "points");
    for f in &s.fits {
        let name = f.measure.name();
        match &f.fit {
            Some(fit) => {
                let _ = writeln!(
                    out,
                    "{:<18} {:>4} {:>10.4} {:>10.4} {:>6}{}",
                    name,
                    f.measure.q(),
                    fit.exponent,
                    fit.half_width,
                    fit.points,
                    if fit.low_confidence { "  low confidence" } else { "" }
                );
            }
            None => {
                let _ = writeln!(out, "{:<18} {:>4}  {}", name, f.measure.q(), f.error.as_deref().unwrap_or(""));
            }
        }
    }
    out
}

pub fn verify_text(v: &VerifyReport) -> String {
    let mut out = format!(
        "symbol {}: {} match, {} mismatch, {} abstained (tolerance max({}, {} x half-width), window [{}, {}])\n",
        v.symbol,
        v.matches,
        v.mismatches,
        v.abstentions,
        v.tolerance,
        v.half_width_factor,
        v.fit_window.0,
        v.fit_window.1
    );
    let _ = writeln!(
        out,
        "{:<12} {:>2} {:>4} {:<9} {:>9} {:>9} {:>8}  {:<10} provenance",
        "(p, q)", "r", "|a|", "measure", "predicted", "measured", "+/-", "verdict"
    );
    for e in &v.entries {
        let f = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        let verdict = match e.verdict {
            Verdict::Match => "match",
            Verdict::Mismatch => "MISMATCH",
            Verdict::Abstained => "abstained",
        };
        let prov = match (&e.provenance, &e.reason) {
            (Some(p), reason) => {
                let mut s = format!(
                    "zone {} {} {}",
                    p.zone.map(|z| z.to_string()).unwrap_or_else(|| "-".into()),
                    p.row,
                    p.envelope
                );
                if let Some(r) = reason {
                    let _ = write!(s, "; {r}");
                }
                s
            }
            (None, Some(r)) => r.clone(),
            (None, None) => String::new(),
        };
        let _ = writeln!(
            out,
            "{:<12} {:>2} {:>4} {:<9} {:>9} {:>9} {:>8}  {:<10} {}",
            e.pair.to_string(),
            e.r,
            e.alpha.iter().sum::<u32>(),
            format!("{:?}", e.measure).to_lowercase(),
            f(e.predicted),
            f(e.measured),
            f(e.half_width),
            verdict,
            prov
        );
    }
    out
}

pub fn corpus_text(list: &[CorpusEntry]) -> String {
    let mut out = format!("{:<28} {:>2} {:>2}  {:<44} {}\n", "name", "n", "m", "equation", "source");
    for e in list {
        let _ = writeln!(out, "{:<28} {:>2} {:>2}  {:<44} {}", e.name, e.dimension, e.order, e.equation, e.source);
    }
    out
}

pub fn corpus_show_text(s: &CorpusShow) -> String {
    format!(
        "{}: {}\n  {}\n  dimension {}, order {}{}\n",
        s.entry.name,
        s.entry.equation,
        s.entry.source,
        s.entry.dimension,
        s.entry.order,
        if s.homogeneous { ", homogeneous" } else { "" }
    )
}
