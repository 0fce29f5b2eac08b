//! Problem files: `[manifold]`, `[poisson]`, `[linfty]` and `[options]`
//! sections of `key = value` lines, `#` comments.

use std::collections::BTreeMap;
use std::sync::Arc;

use dpq_core::linfty::{AlgebroidFrameData, Fiber, StructureConstants};
use dpq_core::{Coordinate, GradedPoly, PoissonStructure, Ring, TruncationBounds};

use crate::expr::{parse_at, Definitions, ExprError, Reader};
use crate::CliError;

pub const SECTIONS: [&str; 4] = ["manifold", "poisson", "linfty", "options"];
const RESERVED: [&str; 3] = ["d", "p", "hbar"];

#[derive(Clone, Debug)]
struct Entry {
    key: String,
    value: String,
    line: usize,
    /// Column of the first character of `value`.
    column: usize,
}

#[derive(Clone, Debug, Default)]
struct Raw {
    sections: BTreeMap<String, (usize, Vec<Entry>)>,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> CliError {
    CliError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn split(text: &str) -> Result<Raw, CliError> {
    let mut raw = Raw::default();
    let mut current: Option<String> = None;
    for (i, full) in text.lines().enumerate() {
        let line = i + 1;
        let body = full.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = body.len() - body.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(syntax(line, indent + 1, "section header must end with `]`"));
            };
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(syntax(line, indent + 2, format!("unknown section `[{name}]`")));
            }
            if raw.sections.contains_key(name) {
                return Err(syntax(line, indent + 1, format!("section `[{name}]` appears twice")));
            }
            raw.sections.insert(name.to_string(), (line, Vec::new()));
            current = Some(name.to_string());
            continue;
        }
        let Some(eq) = body.find('=') else {
            return Err(syntax(line, indent + 1, "expected `key = value`"));
        };
        let Some(section) = &current else {
            return Err(syntax(line, indent + 1, "entry before any section header"));
        };
        let key = body[..eq].trim().to_string();
        let after = &body[eq + 1..];
        let lead = after.len() - after.trim_start().len();
        let value = after.trim().to_string();
        if key.is_empty() {
            return Err(syntax(line, indent + 1, "missing key"));
        }
        if value.is_empty() {
            return Err(syntax(line, eq + 2, format!("missing value for `{key}`")));
        }
        let column = body[..eq + 1 + lead].chars().count() + 1;
        raw.sections.get_mut(section).expect("current section").1.push(Entry {
            key,
            value,
            line,
            column,
        });
    }
    Ok(raw)
}

/// Bounds given on the command line take precedence over `[options]`.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub weight_max: Option<u32>,
    pub base_degree_max: Option<u32>,
    pub poly_degree_max: Option<u32>,
    pub hbar_max: Option<u32>,
    pub k_max: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct LinftyData {
    pub constants: StructureConstants,
    /// Components of the section `s`, when declared.
    pub section: Option<Vec<GradedPoly>>,
    pub frames: AlgebroidFrameData,
}

#[derive(Clone, Debug)]
pub struct Problem {
    /// Declared coordinates; the base when `[linfty]` is present.
    pub manifold: Arc<Ring>,
    /// Ring on which polyvectors, operators and functions are read.
    pub ring: Arc<Ring>,
    pub bounds: TruncationBounds,
    pub k_max: u32,
    pub definitions: Definitions,
    /// `Q + Pi` read from `[poisson]` or induced by `[linfty]`; not checked.
    pub structure: Option<PoissonStructure>,
    pub linfty: Option<LinftyData>,
}

impl Problem {
    pub fn reader(&self) -> Reader<'_> {
        Reader::new(&self.ring, &self.definitions)
    }

    pub fn require_structure(&self) -> Result<&PoissonStructure, CliError> {
        self.structure
            .as_ref()
            .ok_or_else(|| CliError::MissingSection("poisson` or `[linfty]".into()))
    }

    pub fn require_linfty(&self) -> Result<&LinftyData, CliError> {
        self.linfty.as_ref().ok_or_else(|| CliError::MissingSection("linfty".into()))
    }
}

fn parse_nat(e: &Entry) -> Result<u32, CliError> {
    e.value
        .parse()
        .map_err(|_| syntax(e.line, e.column, format!("`{}` expects a natural number", e.key)))
}

fn parse_declaration(e: &Entry) -> Result<(String, i32), CliError> {
    let Some((name, deg)) = e.value.split_once(':') else {
        return Err(syntax(e.line, e.column, "expected `name : degree`"));
    };
    let name = name.trim().to_string();
    if RESERVED.contains(&name.as_str()) {
        return Err(syntax(e.line, e.column, format!("`{name}` is a reserved name")));
    }
    let degree = deg
        .trim()
        .parse()
        .map_err(|_| syntax(e.line, e.column, format!("degree of `{name}` must be an integer")))?;
    Ok((name, degree))
}

/// `key[a,b,...]` into its head and indices.
fn indexed(key: &str) -> Option<(&str, Vec<&str>)> {
    let open = key.find('[')?;
    let inner = key[open + 1..].strip_suffix(']')?;
    let idx = if inner.trim().is_empty() {
        vec![]
    } else {
        inner.split(',').map(str::trim).collect()
    };
    Some((key[..open].trim(), idx))
}

fn expr_err(e: ExprError) -> CliError {
    CliError::Expr(e)
}

fn unknown_key(e: &Entry, section: &str) -> CliError {
    syntax(e.line, 1, format!("unknown key `{}` in [{section}]", e.key))
}

fn bounds(raw: &Raw, over: &Overrides) -> Result<(TruncationBounds, u32), CliError> {
    let mut b = TruncationBounds::default();
    let mut k_max = 4;
    let mut hbar = None;
    if let Some((_, entries)) = raw.sections.get("options") {
        for e in entries {
            match e.key.as_str() {
                "weight_max" => b.weight_max = parse_nat(e)?,
                "base_degree_max" => b.base_degree_max = parse_nat(e)?,
                "poly_degree_max" => b.poly_degree_max = Some(parse_nat(e)?),
                "hbar_max" => hbar = Some(parse_nat(e)?),
                "k_max" => k_max = parse_nat(e)?,
                _ => return Err(unknown_key(e, "options")),
            }
        }
    }
    b.weight_max = over.weight_max.unwrap_or(b.weight_max);
    b.base_degree_max = over.base_degree_max.unwrap_or(b.base_degree_max);
    b.poly_degree_max = over.poly_degree_max.or(b.poly_degree_max);
    k_max = over.k_max.unwrap_or(k_max);
    b.hbar_max = over.hbar_max.or(hbar).unwrap_or(2 * k_max + 4);
    Ok((b, k_max))
}

fn definitions(entries: &[Entry], defs: &mut Definitions) -> Result<(), CliError> {
    for e in entries {
        if let Some(name) = e.key.strip_prefix("let ") {
            let name = name.trim().to_string();
            if RESERVED.contains(&name.as_str()) || name.is_empty() {
                return Err(syntax(e.line, 1, format!("cannot define `{name}`")));
            }
            let expr = parse_at(&e.value, e.line, e.column).map_err(expr_err)?;
            defs.insert(name, expr);
        }
    }
    Ok(())
}

fn poisson(entries: &[Entry], ring: &Arc<Ring>, defs: &Definitions) -> Result<PoissonStructure, CliError> {
    let mut q = GradedPoly::zero(ring);
    let mut pis = BTreeMap::new();
    for e in entries {
        let reader = Reader::new(ring, defs).at(e.line, e.column);
        if e.key.starts_with("let ") {
            continue;
        }
        if e.key == "Q" {
            q = reader.polyvector(&e.value).map_err(expr_err)?;
            continue;
        }
        match indexed(&e.key) {
            Some(("Pi", idx)) if idx.len() == 1 => {
                let n: u32 = idx[0]
                    .parse()
                    .map_err(|_| syntax(e.line, 1, "Pi index must be a natural number"))?;
                if pis.contains_key(&n) {
                    return Err(syntax(e.line, 1, format!("Pi[{n}] given twice")));
                }
                let v = reader.polyvector(&e.value).map_err(expr_err)?;
                if !v.is_zero() {
                    pis.insert(n, v);
                }
            }
            _ => return Err(unknown_key(e, "poisson")),
        }
    }
    Ok(PoissonStructure::new(ring, q, pis)?)
}

fn fiber_indices(sc: &StructureConstants, e: &Entry, names: &[&str]) -> Result<Vec<usize>, CliError> {
    let mut idx = Vec::new();
    for n in names {
        idx.push(
            sc.fiber_index(n)
                .map_err(|_| syntax(e.line, 1, format!("unknown fiber `{n}`")))?,
        );
    }
    let mut sorted = idx.clone();
    sorted.sort();
    sorted.dedup();
    if sorted != idx {
        return Err(syntax(e.line, 1, "fiber indices must be distinct and in declaration order"));
    }
    Ok(idx)
}

/// `bracket[...] = sum_j c_j(x) e_j`, read on the base extended by the fibers.
fn bracket_components(
    sc: &StructureConstants,
    e: &Entry,
    defs: &Definitions,
) -> Result<Vec<GradedPoly>, CliError> {
    let base = sc.base();
    let n = base.dim();
    let mut coords = base.coords().to_vec();
    coords.extend(sc.fibers().iter().map(|f| Coordinate::new(f.name.clone(), f.degree)));
    let ext = Ring::new(coords, base.bounds().clone())?;
    let v = Reader::new(&ext, defs).at(e.line, e.column).function(&e.value).map_err(expr_err)?;
    let mut out = vec![GradedPoly::zero(base); sc.rank()];
    for (m, c) in v.terms() {
        let fibers: Vec<usize> = (0..sc.rank()).filter(|&j| m.0[n + j] > 0).collect();
        if fibers.len() != 1 || m.0[n + fibers[0]] != 1 {
            return Err(syntax(e.line, e.column, "bracket value must be linear in the fiber generators"));
        }
        let mut bm = dpq_core::Monomial::one(base.num_symbols());
        bm.0[..n].copy_from_slice(&m.0[..n]);
        out[fibers[0]] += &GradedPoly::from_monomial(base, bm, c.clone());
    }
    Ok(out)
}

fn linfty(entries: &[Entry], base: &Arc<Ring>, defs: &Definitions) -> Result<LinftyData, CliError> {
    let mut fibers = Vec::new();
    for e in entries.iter().filter(|e| e.key == "fiber") {
        let (name, degree) = parse_declaration(e)?;
        fibers.push(Fiber { name, degree });
    }
    let mut sc = StructureConstants::new(base, fibers)?;
    let r = sc.rank();
    let mut section: Option<Vec<GradedPoly>> = None;
    let mut frame_a: BTreeMap<usize, GradedPoly> = BTreeMap::new();
    let mut frame_t: BTreeMap<usize, GradedPoly> = BTreeMap::new();
    for e in entries {
        if e.key == "fiber" || e.key.starts_with("let ") {
            continue;
        }
        let reader = Reader::new(base, defs).at(e.line, e.column);
        let Some((head, names)) = indexed(&e.key) else {
            return Err(unknown_key(e, "linfty"));
        };
        let idx = fiber_indices(&sc, e, &names)?;
        match head {
            "anchor" => {
                let v = reader.polyvector(&e.value).map_err(expr_err)?;
                sc.set_anchor(&idx, v)?;
            }
            "bracket" => {
                for (j, c) in bracket_components(&sc, e, defs)?.into_iter().enumerate() {
                    if !c.is_zero() {
                        sc.set_bracket(&idx, j, c)?;
                    }
                }
            }
            "section" | "frame_a" | "frame_t" if idx.len() == 1 => {
                let v = reader.function(&e.value).map_err(expr_err)?;
                let target = match head {
                    "section" => section
                        .get_or_insert_with(|| vec![GradedPoly::zero(base); r])
                        .get_mut(idx[0])
                        .expect("index in range"),
                    "frame_a" => frame_a.entry(idx[0]).or_insert_with(|| GradedPoly::zero(base)),
                    _ => frame_t.entry(idx[0]).or_insert_with(|| GradedPoly::zero(base)),
                };
                if !target.is_zero() {
                    return Err(syntax(e.line, 1, format!("`{}` given twice", e.key)));
                }
                *target = v;
            }
            _ => return Err(unknown_key(e, "linfty")),
        }
    }
    let mut frames = AlgebroidFrameData::canonical(&sc);
    for (i, v) in frame_a {
        frames.top_a_action[i] = v;
    }
    for (i, v) in frame_t {
        frames.top_cotangent_action[i] = v;
    }
    Ok(LinftyData {
        constants: sc,
        section,
        frames,
    })
}

/// `Q + Pi` induced on the dual bundle, with `iota_s` added to `Q`.
fn induced_structure(data: &LinftyData) -> Result<PoissonStructure, CliError> {
    let sc = &data.constants;
    let lp = sc.linear_poisson_unchecked()?;
    let Some(s) = &data.section else {
        return Ok(lp);
    };
    let dual = sc.dual_ring();
    let n = sc.base().dim();
    let mut q = lp.q().clone();
    for (i, si) in s.iter().enumerate() {
        q += &(&sc.embed(si, dual)? * &GradedPoly::symbol(dual, dual.momentum_index(n + i)));
    }
    Ok(PoissonStructure::new(dual, q, lp.pis().clone())?)
}

pub fn parse_problem(text: &str, over: &Overrides) -> Result<Problem, CliError> {
    let raw = split(text)?;
    let Some((_, manifold)) = raw.sections.get("manifold") else {
        return Err(CliError::MissingSection("manifold".into()));
    };
    let (bounds, k_max) = bounds(&raw, over)?;
    let mut coords = Vec::new();
    for e in manifold {
        if e.key != "coord" {
            return Err(unknown_key(e, "manifold"));
        }
        let (name, degree) = parse_declaration(e)?;
        coords.push(Coordinate::new(name, degree));
    }
    let manifold_ring = Ring::new(coords, bounds.clone())?;
    let mut defs = Definitions::new();
    for s in ["poisson", "linfty"] {
        if let Some((_, entries)) = raw.sections.get(s) {
            definitions(entries, &mut defs)?;
        }
    }
    let poisson_entries = raw.sections.get("poisson");
    let linfty_entries = raw.sections.get("linfty");
    let (ring, structure, linfty_data) = match (poisson_entries, linfty_entries) {
        (Some((line, _)), Some(_)) => {
            return Err(syntax(*line, 1, "`[poisson]` and `[linfty]` cannot both be given"));
        }
        (Some((_, entries)), None) => {
            let s = poisson(entries, &manifold_ring, &defs)?;
            (manifold_ring.clone(), Some(s), None)
        }
        (None, Some((_, entries))) => {
            let data = linfty(entries, &manifold_ring, &defs)?;
            let s = induced_structure(&data)?;
            (data.constants.dual_ring().clone(), Some(s), Some(data))
        }
        (None, None) => (manifold_ring.clone(), None, None),
    };
    Ok(Problem {
        manifold: manifold_ring,
        ring,
        bounds,
        k_max,
        definitions: defs,
        structure,
        linfty: linfty_data,
    })
}
