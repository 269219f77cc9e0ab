//! JSON results shared by the command line and the C interface.

use std::collections::BTreeSet;

use serde_json::{json, Value};

use crate::contexts::ContextPoset;
use crate::daseinisation::{daseinise_with, inner_outer, value_from_profile_with};
use crate::error::{Error, Result};
use crate::interval::RationalInterval;
use crate::ks::find_point;
use crate::lattice::{frame_json, frame_of_site, FiniteLattice, Site, SiteJson};
use crate::spectrum::{atom_list, generator, heights, SpectralOpen, DEFAULT_ENUM_CAP};
use crate::states::pair_with;
use crate::system::System;

/// Frames of systems are enumerated up to this many opens.
pub const FRAME_ENUM_CAP: usize = 512;

#[derive(Clone, Debug)]
pub struct Report {
    pub result: Value,
    /// Hasse diagram of the poset or frame involved.
    pub dot: String,
    /// Boundary ties and near misses, human readable.
    pub warnings: Vec<String>,
    /// Set by `ks` when the search found no point.
    pub no_point: bool,
    /// Plain-text rendering for a terminal, if any.
    pub table: Option<String>,
}

impl Report {
    fn new(result: Value, dot: String) -> Self {
        Report { result, dot, warnings: Vec::new(), no_point: false, table: None }
    }
}

fn label(p: &ContextPoset, c: usize) -> String {
    p.contexts()[c].label().to_string()
}

fn labels(p: &ContextPoset, cs: impl IntoIterator<Item = usize>) -> Vec<String> {
    cs.into_iter().map(|c| label(p, c)).collect()
}

fn hasse(p: &ContextPoset) -> Vec<[String; 2]> {
    p.hasse_edges().into_iter().map(|(a, b)| [label(p, a), label(p, b)]).collect()
}

fn atom_tables(p: &ContextPoset) -> String {
    let mut out = String::new();
    for c in p.contexts() {
        out.push_str(&format!("{}: {} atoms\n", c.label(), c.num_atoms()));
        for (i, q) in c.atoms().iter().enumerate() {
            out.push_str(&format!("  atom {i} (rank {})\n", q.rank()));
            for line in format!("{:?}", q.matrix()).lines().skip(1) {
                out.push_str(&format!("  {line}\n"));
            }
        }
    }
    for [a, b] in hasse(p) {
        out.push_str(&format!("{a} < {b}\n"));
    }
    out
}

pub fn poset(p: &ContextPoset) -> Report {
    let contexts: Vec<Value> = p
        .contexts()
        .iter()
        .map(|c| {
            json!({
                "label": c.label(),
                "atoms": c.atoms().iter().map(|q| json!({"rank": q.rank(), "matrix": q.matrix()})).collect::<Vec<_>>(),
            })
        })
        .collect();
    let result = json!({
        "contexts": contexts,
        "hasse": hasse(p),
        "maximal": labels(p, p.maximal()),
        "heights": heights(p),
    });
    let mut r = Report::new(result, p.to_dot(&BTreeSet::new()));
    r.table = Some(atom_tables(p));
    r
}

/// Context sizes, the number of opens when it is below the enumeration cap,
/// and optionally the generators of an observable.
pub fn spectrum(sys: &System, observable: Option<&str>, list: bool) -> Result<Report> {
    let p = &sys.poset;
    let mut result = json!({
        "contexts": p.contexts().iter().map(|c| json!({"label": c.label(), "atoms": c.num_atoms()})).collect::<Vec<_>>(),
        "hasse": hasse(p),
    });
    match SpectralOpen::enumerate(p, DEFAULT_ENUM_CAP) {
        Ok(opens) => {
            result["opens"] = json!(opens.len());
            if list {
                result["list"] = json!(opens.iter().map(SpectralOpen::to_json).collect::<Vec<_>>());
            }
        }
        Err(Error::EnumerationTooLarge { .. }) => result["opens"] = Value::Null,
        Err(e) => return Err(e),
    }
    if let Some(name) = observable {
        let a = sys.observable(name)?;
        let mut gens = serde_json::Map::new();
        for c in p.contexts() {
            if let Ok(d) = generator(c, a) {
                gens.insert(c.label().to_string(), json!(atom_list(d)));
            }
        }
        result["generators"] = Value::Object(gens);
    }
    Ok(Report::new(result, p.to_dot(&BTreeSet::new())))
}

pub fn daseinise(sys: &System, observable: &str, iv: &RationalInterval) -> Result<Report> {
    let a = sys.observable(observable)?;
    let d = daseinise_with(a, iv, &sys.poset, sys.tolerances.strict)?;
    let result = json!({
        "values": d.open.to_json().values,
        "profiles": d.profiles,
        "warnings": d.warnings,
    });
    let support: BTreeSet<usize> = (0..sys.poset.len()).filter(|&c| d.open.values()[c] != 0).collect();
    let mut r = Report::new(result, sys.poset.to_dot(&support));
    r.warnings = d.warnings.iter().map(|w| w.to_string()).collect();
    r.table = Some(d.open.render_table());
    Ok(r)
}

/// `base` is a context label; `None` means the trivial context.
pub fn pair(sys: &System, observable: &str, iv: &RationalInterval, state: &str, base: Option<&str>) -> Result<Report> {
    let a = sys.observable(observable)?;
    let rho = sys.state(state)?;
    let base = match base {
        Some(l) => sys.context_index(l)?,
        None => sys.poset.bottom(),
    };
    let t = sys.tolerances;
    let pairing = pair_with(a, iv, rho, &sys.poset, base, t.strict, t.prob)?;
    let mut warnings = Vec::new();
    for c in sys.poset.up(base) {
        let prof = inner_outer(a, &sys.poset.contexts()[c])?;
        warnings.extend(value_from_profile_with(&prof, iv, t.strict).1);
    }
    let members = pairing.truth.members();
    let result = json!({
        "base": label(&sys.poset, base),
        "members": labels(&sys.poset, members.iter().copied()),
        "near_misses": pairing.near_misses,
        "warnings": warnings,
    });
    let mut r = Report::new(result, sys.poset.to_dot(members));
    r.warnings = warnings.iter().map(|w| w.to_string()).collect();
    r.warnings.extend(pairing.near_misses.iter().map(|n| n.to_string()));
    Ok(r)
}

pub fn ks(p: &ContextPoset) -> Report {
    let cert = find_point(p);
    let result = serde_json::to_value(cert.to_json(p)).expect("certificate serialises");
    let mut r = Report::new(result, p.to_dot(&BTreeSet::new()));
    r.no_point = !cert.has_point();
    r
}

fn lattice_value(lat: &FiniteLattice) -> Value {
    json!({
        "elements": lat.names(),
        "hasse": lat.hasse_edges().into_iter().map(|(a, b)| [a, b]).collect::<Vec<_>>(),
        "distributive": lat.is_distributive(),
    })
}

pub fn site_frame(json: &SiteJson) -> Result<Report> {
    let site = Site::from_json(json)?;
    let frame = frame_of_site(&site)?;
    let lat = frame.lattice(&site)?;
    let result = json!({
        "frame": frame_json(&site, &frame)?,
        "lattice": lattice_value(&lat),
    });
    Ok(Report::new(result, lat.to_dot("frame")))
}

/// All opens of the spectrum of the system with their order.
pub fn system_frame(sys: &System) -> Result<Report> {
    let opens = SpectralOpen::enumerate(&sys.poset, FRAME_ENUM_CAP)?;
    let names: Vec<String> = (0..opens.len()).map(|i| format!("U{i}")).collect();
    let lat = FiniteLattice::from_order(names, |i, j| opens[i].leq(&opens[j]).unwrap_or(false))?;
    let result = json!({
        "opens": opens.iter().map(SpectralOpen::to_json).collect::<Vec<_>>(),
        "lattice": lattice_value(&lat),
    });
    Ok(Report::new(result, lat.to_dot("frame")))
}
