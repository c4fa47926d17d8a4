//! Text renderers for every subcommand. All output is built from exact
//! values or sorted collections, so identical inputs give identical bytes.

use hexmg::clustering::ClusterPlan;
use hexmg::converse::{CensusRow, SchedulePlan, Violation};
use hexmg::lattice::{Network, SectorId};
use hexmg::rational::format_decimal;
use hexmg::regions::{num_den, MGPoint};
use num_rational::BigRational;
use serde_json::{json, Map, Value};

const PLACES: usize = 6;

fn csv_text<F>(header: &[&str], fill: F) -> String
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    fill(&mut w).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 fields")
}

fn sector_fields(s: SectorId) -> [String; 3] {
    [
        s.cell.q.to_string(),
        s.cell.r.to_string(),
        s.orientation.index().to_string(),
    ]
}

pub fn lattice_csv(net: &Network) -> String {
    csv_text(
        &[
            "sector_cell_q",
            "sector_cell_r",
            "orientation",
            "neighbor_cell_q",
            "neighbor_cell_r",
            "neighbor_orientation",
        ],
        |w| {
            for (a, b) in net.directed_interference() {
                let [aq, ar, ao] = sector_fields(a);
                let [bq, br, bo] = sector_fields(b);
                w.write_record([aq, ar, ao, bq, br, bo])?;
            }
            Ok(())
        },
    )
}

/// One row per sector. The master user is labelled `MASTER`; silenced
/// sectors have an empty cluster id.
pub fn cluster_csv(plan: &ClusterPlan<'_>) -> String {
    csv_text(
        &["cell_q", "cell_r", "orientation", "role", "cluster_id"],
        |w| {
            for s in plan.network().sectors() {
                let role = if plan.is_master_user(s) {
                    "MASTER"
                } else {
                    plan.role(s).map(|r| r.label()).unwrap_or_default()
                };
                let id = plan
                    .cluster_of(s)
                    .map(|i| i.to_string())
                    .unwrap_or_default();
                let [q, r, o] = sector_fields(s);
                w.write_record([q, r, o, role.to_string(), id])?;
            }
            Ok(())
        },
    )
}

/// Named point lists, e.g. `("inner", vertices)`.
pub type Series<'a> = Vec<(&'a str, Vec<MGPoint>)>;

pub fn region_csv(series: &Series<'_>) -> String {
    csv_text(&["bound", "sf", "ss"], |w| {
        for (name, pts) in series {
            for p in pts {
                let (sf, ss) = p.display(PLACES);
                w.write_record([name.to_string(), sf, ss])?;
            }
        }
        Ok(())
    })
}

fn exact(x: &BigRational) -> Value {
    let (n, d) = num_den(x);
    let num = |v: String| Value::Number(v.parse().expect("integer literal"));
    json!([num(n.to_string()), num(d.to_string())])
}

pub fn region_json(params: &[(&str, Value)], series: &Series<'_>) -> String {
    let mut root = Map::new();
    let p: Map<String, Value> = params
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect();
    root.insert("params".into(), Value::Object(p));
    for (name, pts) in series {
        let list: Vec<Value> = pts
            .iter()
            .map(|p| json!({ "sf": exact(&p.sf), "ss": exact(&p.ss) }))
            .collect();
        root.insert(name.to_string(), Value::Array(list));
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("json");
    s.push('\n');
    s
}

pub fn rational_json(x: &BigRational) -> Value {
    exact(x)
}

const SVG_SIZE: i64 = 480;
const SVG_MARGIN: i64 = 60;

fn colour(name: &str) -> &'static str {
    match name {
        "inner" => "#2a7f3f",
        "outer" => "#b0302a",
        _ => "#333333",
    }
}

/// Static plot of each series as a closed polyline in the `(S^F, S^S)` plane.
pub fn region_svg(series: &Series<'_>) -> String {
    let mut extent = BigRational::from_integer(1.into());
    for (_, pts) in series {
        for p in pts {
            extent = extent.max(p.sf.clone()).max(p.ss.clone());
        }
    }
    let span = BigRational::from_integer((SVG_SIZE - 2 * SVG_MARGIN).into());
    let origin = BigRational::from_integer(SVG_MARGIN.into());
    let bottom = BigRational::from_integer((SVG_SIZE - SVG_MARGIN).into());
    let px = |v: &BigRational| format_decimal(&(&origin + v * &span / &extent), 2);
    let py = |v: &BigRational| format_decimal(&(&bottom - v * &span / &extent), 2);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_SIZE}\" height=\"{SVG_SIZE}\" viewBox=\"0 0 {SVG_SIZE} {SVG_SIZE}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let (lo, hi) = (SVG_MARGIN, SVG_SIZE - SVG_MARGIN);
    out.push_str(&format!(
        "<line x1=\"{lo}\" y1=\"{hi}\" x2=\"{hi}\" y2=\"{hi}\" stroke=\"black\"/>\n<line x1=\"{lo}\" y1=\"{hi}\" x2=\"{lo}\" y2=\"{lo}\" stroke=\"black\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\">S^(F)</text>\n",
        SVG_SIZE / 2,
        SVG_SIZE - SVG_MARGIN / 3
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 {} {})\">S^(S)</text>\n",
        SVG_MARGIN / 3,
        SVG_SIZE / 2,
        SVG_MARGIN / 3,
        SVG_SIZE / 2
    ));
    out.push_str(&format!(
        "<text x=\"{hi}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
        hi + 16,
        format_decimal(&extent, 4)
    ));
    for (i, (name, pts)) in series.iter().enumerate() {
        let mut coords: Vec<String> = pts
            .iter()
            .map(|p| format!("{},{}", px(&p.sf), py(&p.ss)))
            .collect();
        if let Some(first) = coords.first().cloned() {
            coords.push(first);
        }
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
            colour(name),
            coords.join(" ")
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{}\">{name}</text>\n",
            hi - 60,
            lo + 16 * (i as i64 + 1),
            colour(name)
        ));
    }
    out.push_str("</svg>\n");
    out
}

pub fn census_csv(rows: &[CensusRow]) -> String {
    csv_text(&["color", "count", "fraction", "limit", "abs_error"], |w| {
        for r in rows {
            w.write_record([
                r.color.label().to_string(),
                r.count.to_string(),
                format_decimal(&r.fraction, PLACES),
                format_decimal(&r.limit, PLACES),
                format_decimal(&r.abs_error, PLACES),
            ])?;
        }
        Ok(())
    })
}

fn joined<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn schedule_table(plan: &SchedulePlan) -> String {
    csv_text(
        &["step", "kind", "phase", "round", "consumes", "produces"],
        |w| {
            for (i, s) in plan.steps.iter().enumerate() {
                w.write_record([
                    i.to_string(),
                    s.kind.label().to_string(),
                    s.phase.to_string(),
                    s.round.map(|r| r.to_string()).unwrap_or_default(),
                    joined(&s.consumes),
                    joined(&s.produces),
                ])?;
            }
            Ok(())
        },
    )
}

pub fn violations_text(v: &[Violation]) -> String {
    if v.is_empty() {
        return "VALID\n".to_string();
    }
    let mut s = String::new();
    for x in v {
        s.push_str(&format!("violation {x}\n"));
    }
    s.push_str(&format!("INVALID ({} violations)\n", v.len()));
    s
}
