use clap::Subcommand;
use dpq_core::hbar::{HbarOp, HbarSymbol};
use dpq_core::linfty::{elw_quantize, fourier_quantize};
use dpq_core::polyvector::CoboundaryOutcome;
use dpq_core::quantizer::{
    default_second_order, modular_dg, quantize, LiftOutcome, LiftRecord, Obstruction, QuantizationState, QuantizeOutcome,
};
use dpq_core::{poisson_bracket, GradedPoly, PoissonStructure};

use crate::expr::{show_hbar, show_operator, show_poly};
use crate::problem::Problem;
use crate::report::{Report, Status};
use crate::CliError;

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Maurer-Cartan equation and, for `[linfty]`, D^2 = 0.
    Check,
    /// Poisson bracket of two polyvectors.
    Bracket {
        #[arg(long, allow_hyphen_values = true)]
        lhs: String,
        #[arg(long, allow_hyphen_values = true)]
        rhs: String,
    },
    /// Principal symbol of an operator.
    Symbol {
        #[arg(long, allow_hyphen_values = true)]
        op: String,
        /// Defaults to the order of the operator.
        #[arg(long)]
        n: Option<u32>,
    },
    Adjoint {
        #[arg(long, allow_hyphen_values = true)]
        op: String,
    },
    Square {
        #[arg(long, allow_hyphen_values = true)]
        op: String,
    },
    /// Runs the lifting procedure up to `k_max`.
    Quantize {
        #[arg(long)]
        k_max: Option<u32>,
    },
    /// The obstruction class at level `k`, lifting the levels below it.
    Obstruction {
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
    /// Modular analysis of `hbar L_Q + hbar^2 D_2`.
    ModularDg {
        /// Second-order part; defaults to the symmetric quantization of Pi_2.
        #[arg(long, allow_hyphen_values = true)]
        op: Option<String>,
    },
    /// Fourier quantization of the `[linfty]` data.
    LinftyQuantize,
    /// ELW quantization of the `[linfty]` Lie algebroid with its section.
    ElwQuantize,
    /// Derived bracket of functions under an hbar-operator.
    DerivedBracket {
        /// Defaults to the initial quantization (the Fourier one for `[linfty]`).
        #[arg(long, allow_hyphen_values = true)]
        op: Option<String>,
        /// Comma-separated functions.
        #[arg(long, allow_hyphen_values = true)]
        args: String,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Bracket { .. } => "bracket",
            Command::Symbol { .. } => "symbol",
            Command::Adjoint { .. } => "adjoint",
            Command::Square { .. } => "square",
            Command::Quantize { .. } => "quantize",
            Command::Obstruction { .. } => "obstruction",
            Command::ModularDg { .. } => "modular-dg",
            Command::LinftyQuantize => "linfty-quantize",
            Command::ElwQuantize => "elw-quantize",
            Command::DerivedBracket { .. } => "derived-bracket",
        }
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn structure_facts(r: &mut Report, s: &PoissonStructure) {
    r.fact("Q", show_poly(s.q()));
    for (n, pi) in s.pis() {
        r.fact(format!("Pi[{n}]"), show_poly(pi));
    }
}

fn obstruction_facts(r: &mut Report, s: &PoissonStructure, ob: &Obstruction) -> Result<(), CliError> {
    r.fact("k", ob.k);
    r.fact("t_index", ob.t_index.map_or_else(|| "none".to_string(), |t| t.to_string()));
    r.fact("cocycle", show_poly(&ob.cocycle));
    r.fact("cocycle_check", yes(s.d_pi(&ob.cocycle)?.is_zero()));
    match &ob.outcome {
        CoboundaryOutcome::Solved(x) => {
            r.fact("solve_status", "SOLVED");
            r.fact("solution", show_poly(x));
        }
        CoboundaryOutcome::Obstructed { unknowns, equations, rank } => {
            r.fact("solve_status", "OBSTRUCTED_WITHIN_BOUNDS");
            r.fact("slice.unknowns", unknowns);
            r.fact("slice.equations", equations);
            r.fact("slice.rank", rank);
            r.fact("verdict", "bound-relative: no solution within the slice");
        }
    }
    Ok(())
}

fn history_facts(r: &mut Report, history: &[LiftRecord]) {
    r.fact("lifts", history.len());
    for rec in history {
        r.fact(format!("lift.{}.cocycle", rec.k), show_poly(&rec.cocycle));
        r.fact(format!("lift.{}.correction", rec.k), show_poly(&rec.correction));
    }
}

fn bv_facts(r: &mut Report, delta: &HbarOp) -> bool {
    let bv = delta.is_bv_infinity();
    r.fact("bv.degree_ok", yes(bv.degree_ok));
    r.fact("bv.vanishes_at_zero", yes(bv.vanishes_at_zero));
    r.fact("bv.symbol_nonzero", yes(bv.symbol_nonzero));
    r.fact("bv.square_vanishes", yes(bv.square_vanishes));
    if !bv.square_vanishes {
        r.fact("bv.square", show_hbar(&bv.square));
    }
    bv.passed()
}

fn split_args(text: &str) -> Vec<&str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn initial_delta(problem: &Problem) -> Result<HbarOp, CliError> {
    if let Some(data) = &problem.linfty {
        return Ok(fourier_quantize(&data.constants)?.delta);
    }
    Ok(QuantizationState::initial(problem.require_structure()?)?.delta)
}

pub fn run(command: &Command, problem: &Problem) -> Result<Report, CliError> {
    let name = command.name();
    let b = &problem.bounds;
    let reader = problem.reader();
    let report = match command {
        Command::Check => {
            let mut r = Report::new(name, Status::Pass, b);
            let mut ok = true;
            if let Some(data) = &problem.linfty {
                let lin = data.constants.check_linfty()?;
                r.fact("linfty_check", if lin.passed { "PASS" } else { "FAIL" });
                if !lin.passed {
                    r.fact("linfty_residual", show_operator(&dpq_core::HalfDensityOp::from_normal_form(lin.residual)));
                }
                ok &= lin.passed;
            }
            let s = problem.require_structure()?;
            structure_facts(&mut r, s);
            let mc = s.mc_check();
            r.fact("mc_check", if mc.passed { "PASS" } else { "FAIL" });
            for (w, res) in &mc.residual {
                r.fact(format!("mc_residual[{w}]"), show_poly(res));
            }
            ok &= mc.passed;
            r.status = if ok { Status::Pass } else { Status::Fail };
            r
        }
        Command::Bracket { lhs, rhs } => {
            let f = reader.polyvector(lhs)?;
            let g = reader.polyvector(rhs)?;
            let mut r = Report::new(name, Status::Ok, b);
            r.fact("lhs", show_poly(&f)).fact("rhs", show_poly(&g));
            r.fact("bracket", show_poly(&poisson_bracket(&f, &g)?));
            r
        }
        Command::Symbol { op, n } => {
            let d = reader.operator(op)?;
            let order = d.order().unwrap_or(0);
            let n = n.unwrap_or(order);
            let mut r = Report::new(name, Status::Ok, b);
            r.fact("op", show_operator(&d)).fact("order", order).fact("n", n);
            r.fact("symbol", show_poly(&d.principal_symbol(n)?));
            r
        }
        Command::Adjoint { op } => {
            let d = reader.operator(op)?;
            let adj = d.adjoint()?;
            let mut r = Report::new(name, Status::Ok, b);
            r.fact("op", show_operator(&d));
            r.fact("adjoint", show_operator(&adj));
            r.fact("self_adjoint", yes(adj == d));
            r
        }
        Command::Square { op } => {
            let d = reader.operator(op)?;
            let mut r = Report::new(name, Status::Ok, b);
            r.fact("op", show_operator(&d));
            r.fact("square", show_operator(&d.checked_compose(&d)?));
            r
        }
        Command::Quantize { k_max } => {
            let s = problem.require_structure()?;
            let k_max = k_max.unwrap_or(problem.k_max);
            let outcome = quantize(s, k_max)?;
            let mut r = Report::new(name, Status::Quantized, b);
            r.fact("k_max", k_max);
            structure_facts(&mut r, s);
            match outcome {
                QuantizeOutcome::Quantized(state) => {
                    r.fact("k", state.k);
                    history_facts(&mut r, &state.history);
                    r.fact("delta", show_hbar(&state.delta));
                    bv_facts(&mut r, &state.delta);
                }
                QuantizeOutcome::Obstructed(state, ob) => {
                    r.status = Status::Obstructed;
                    obstruction_facts(&mut r, s, &ob)?;
                    history_facts(&mut r, &state.history);
                    r.fact("delta", show_hbar(&state.delta));
                }
                QuantizeOutcome::Exhausted(state) => {
                    r.status = Status::Exhausted;
                    r.fact("k", state.k);
                    history_facts(&mut r, &state.history);
                    r.fact("delta", show_hbar(&state.delta));
                }
            }
            r.fact("correction_rule", "lexicographically minimal pivot solution; other solutions give equally valid lifts");
            r
        }
        Command::Obstruction { k } => {
            let s = problem.require_structure()?;
            if *k == 0 {
                return Err(CliError::Usage("levels start at k = 1".into()));
            }
            let mut state = QuantizationState::initial(s)?;
            let mut r = Report::new(name, Status::Solved, b);
            r.fact("requested_k", k);
            let ob = loop {
                if state.k == *k {
                    break state.obstruction()?;
                }
                match state.lift_step()? {
                    LiftOutcome::Flat(next) | LiftOutcome::Lifted(next) => state = next,
                    LiftOutcome::Obstructed(ob) => break ob,
                }
            };
            obstruction_facts(&mut r, s, &ob)?;
            if ob.is_obstructed() {
                r.status = Status::Obstructed;
            }
            history_facts(&mut r, &state.history);
            r
        }
        Command::ModularDg { op } => {
            let s = problem.require_structure()?;
            let d2 = match op {
                Some(text) => reader.operator(text)?,
                None => default_second_order(s),
            };
            let m = modular_dg(s, &d2)?;
            let mut r = Report::new(name, Status::Obstructed, b);
            structure_facts(&mut r, s);
            r.fact("D2", show_operator(&d2));
            r.fact("mc_check", if m.mc_passed { "PASS" } else { "FAIL" });
            r.fact("X0", show_poly(&m.x0));
            r.fact("X1", show_poly(&m.x1));
            r.fact("lq_residual", show_operator(&m.lq_residual));
            match (&m.correction, &m.delta) {
                (Some(f), Some(delta)) => {
                    r.fact("special_solve", "SOLVED");
                    r.fact("correction", show_poly(f));
                    r.fact("delta", show_hbar(delta));
                    r.fact("verified", yes(m.verified));
                    if m.verified {
                        r.status = Status::Solved;
                    }
                }
                _ => {
                    let why = if m.lq_residual.is_zero() {
                        "no function f solves the equations within the slice"
                    } else {
                        "[L_Q, D_2] has positive order"
                    };
                    r.fact("special_solve", "FAILED");
                    r.fact("reason", why);
                }
            }
            r
        }
        Command::LinftyQuantize => {
            let data = problem.require_linfty()?;
            let fq = fourier_quantize(&data.constants)?;
            let mut r = Report::new(name, Status::Pass, b);
            structure_facts(&mut r, &fq.structure);
            r.fact("delta", show_hbar(&fq.delta));
            let bv = bv_facts(&mut r, &fq.delta);
            let symbol = fq.delta.extended_symbol() == HbarSymbol::embed(&fq.structure.total());
            let sa = fq.delta.is_self_adjoint();
            r.fact("symbol_check", yes(symbol));
            r.fact("self_adjoint", yes(sa));
            let sc = &data.constants;
            let ring = sc.dual_ring();
            let n = sc.base().dim();
            let fibers = sc.fibers();
            let xi = |i: usize| GradedPoly::symbol(ring, n + i);
            for i in 0..fibers.len() {
                for j in i + 1..fibers.len() {
                    let v = fq.delta.derived_bracket(&[xi(i), xi(j)])?;
                    r.fact(format!("lambda2[{},{}]", fibers[i].name, fibers[j].name), show_poly(&v));
                }
                for a in 0..n {
                    let v = fq.delta.derived_bracket(&[xi(i), GradedPoly::symbol(ring, a)])?;
                    r.fact(format!("lambda2[{},{}]", fibers[i].name, ring.coords()[a].name), show_poly(&v));
                }
            }
            if !(bv && symbol && sa) {
                r.status = Status::Fail;
            }
            r
        }
        Command::ElwQuantize => {
            let data = problem.require_linfty()?;
            let Some(section) = &data.section else {
                return Err(CliError::Usage("elw-quantize needs `section[...]` entries in [linfty]".into()));
            };
            let elw = elw_quantize(&data.constants, &data.frames, section)?;
            let mut r = Report::new(name, Status::Pass, b);
            for (i, si) in section.iter().enumerate() {
                r.fact(format!("section[{}]", data.constants.fibers()[i].name), show_poly(si));
            }
            r.fact("contraction", show_operator(&elw.contraction));
            r.fact("bv_part", show_operator(&elw.bv_part));
            r.fact("delta", show_hbar(&elw.delta));
            r.fact("square_vanishes", yes(elw.square_vanishes));
            r.fact("commutes", yes(elw.commutes));
            let bv = bv_facts(&mut r, &elw.delta);
            if !(elw.square_vanishes && elw.commutes && bv) {
                r.status = Status::Fail;
            }
            r
        }
        Command::DerivedBracket { op, args } => {
            let delta = match op {
                Some(text) => reader.hbar(text)?,
                None => initial_delta(problem)?,
            };
            let fs: Vec<GradedPoly> = split_args(args)
                .into_iter()
                .map(|a| reader.function(a))
                .collect::<Result<_, _>>()?;
            if fs.is_empty() {
                return Err(CliError::Usage("--args needs at least one function".into()));
            }
            let mut r = Report::new(name, Status::Ok, b);
            r.fact("op", show_hbar(&delta));
            r.fact("args", fs.iter().map(show_poly).collect::<Vec<_>>().join(", "));
            r.fact("value", show_poly(&delta.derived_bracket(&fs)?));
            r
        }
    };
    Ok(report)
}

