use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;

use dpq_cli::expr::{show_hbar, show_operator, show_poly, Definitions, Reader};
use dpq_cli::{parse_problem, run, CliError, Overrides, Report, Status};
use dpq_core::Ring;
use dpq_testkit::fixtures::{self, bounds, ring};
use dpq_testkit::{rng, Sampler};
use rand::Rng;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn dpq(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_dpq")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn load(name: &str) -> dpq_cli::Problem {
    parse_problem(&std::fs::read_to_string(fixture(name)).unwrap(), &Overrides::default()).unwrap()
}

fn rings() -> Vec<Arc<Ring>> {
    vec![
        fixtures::hovik_ring(bounds(4, 4)),
        ring(&[("a", 0), ("b", 0), ("y", 2)], bounds(4, 4)),
        ring(&[("u", 1), ("x", 0), ("w", -3)], bounds(4, 4)),
    ]
}

const DELTA2: &str = "-xi*tau*d(tau)*d(z) + 1/2 * xi*d(z) + tau*d(xi)*d(tau) + 1/2 * d(xi)";

#[test]
fn polyvectors_round_trip() {
    let mut g = rng(7);
    let defs = Definitions::new();
    for r in rings() {
        let s = Sampler::new(&r, 3, 3);
        let reader = Reader::new(&r, &defs);
        for _ in 0..60 {
            let d = s.degrees()[g.gen_range(0..s.degrees().len())];
            let p = s.poly(&mut g, d, 0..=3, 5);
            let text = show_poly(&p);
            assert_eq!(reader.polyvector(&text).unwrap(), p, "{text}");
            assert_eq!(show_poly(&reader.polyvector(&text).unwrap()), text);
        }
    }
}

#[test]
fn operators_round_trip() {
    let mut g = rng(8);
    let defs = Definitions::new();
    for r in rings() {
        let s = Sampler::new(&r, 3, 3);
        let reader = Reader::new(&r, &defs);
        for _ in 0..60 {
            let order = g.gen_range(0..=3);
            let op = s.any_operator(&mut g, order, 5);
            let text = show_operator(&op);
            assert_eq!(reader.operator(&text).unwrap(), op, "{text}");
        }
    }
}

#[test]
fn hbar_operators_round_trip() {
    let mut g = rng(9);
    let defs = Definitions::new();
    for r in rings() {
        let s = Sampler::new(&r, 3, 3);
        let reader = Reader::new(&r, &defs);
        for _ in 0..40 {
            let d = s.degrees()[g.gen_range(0..s.degrees().len())];
            let op = s.hbar_op(&mut g, d, 0, 5, 3);
            let text = show_hbar(&op);
            assert_eq!(reader.hbar(&text).unwrap(), op, "{text}");
        }
    }
}

#[test]
fn operator_words_are_normal_ordered() {
    let r = fixtures::hovik_ring(bounds(4, 4));
    let defs = Definitions::new();
    let reader = Reader::new(&r, &defs);
    let word = reader.operator("d(xi)*xi").unwrap();
    assert_eq!(show_operator(&word), "-xi*d(xi) + 1");
    let delta = reader.operator(DELTA2).unwrap();
    assert_eq!(delta, fixtures::hovik_delta2(&r));
}

#[test]
fn fixtures_match_reference_data() {
    let hovik = load("hovik.dpq");
    let (_, reference) = fixtures::hovik(bounds(4, 4));
    assert_eq!(show_poly(&hovik.require_structure().unwrap().pi(2)), show_poly(&reference.pi(2)));
    assert!(hovik.require_structure().unwrap().q().is_zero());

    let lie2 = load("lie2.dpq");
    let data = lie2.require_linfty().unwrap();
    let reference = fixtures::lie2().linear_poisson_unchecked().unwrap();
    assert_eq!(
        show_poly(&data.constants.linear_poisson_unchecked().unwrap().total()),
        show_poly(&reference.total())
    );
    assert!(lie2.structure.is_some());

    let elw = load("elw-r1.dpq");
    assert_eq!(elw.require_linfty().unwrap().section.as_ref().map(Vec::len), Some(1));
}

#[test]
fn reports_round_trip_through_machine_form() {
    for (file, cmd) in [
        ("hovik.dpq", dpq_cli::Command::Quantize { k_max: None }),
        ("hovik.dpq", dpq_cli::Command::Check),
        ("lie2.dpq", dpq_cli::Command::LinftyQuantize),
        ("elw-r1.dpq", dpq_cli::Command::ElwQuantize),
    ] {
        let report = run(&cmd, &load(file)).unwrap();
        let text = report.machine();
        let back = Report::parse_machine(&text).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.machine(), text);
    }
}

#[test]
fn square_of_delta2() {
    let (code, out, _) = dpq(&["--machine", "square", "--op", DELTA2, fixture("hovik.dpq").to_str().unwrap()]);
    assert_eq!(code, 0);
    let r = Report::parse_machine(&out).unwrap();
    assert_eq!(r.get("square"), Some("1/4 * d(z)"));
}

#[test]
fn quantize_hovik_is_obstructed() {
    let (code, out, _) = dpq(&["--machine", "quantize", fixture("hovik.dpq").to_str().unwrap()]);
    assert_eq!(code, 1);
    let r = Report::parse_machine(&out).unwrap();
    assert_eq!(r.status, Status::Obstructed);
    assert_eq!(r.get("cocycle"), Some("1/4 * p[z]"));
    assert_eq!(r.get("cocycle_check"), Some("true"));
    assert_eq!(r.get("solve_status"), Some("OBSTRUCTED_WITHIN_BOUNDS"));
}

#[test]
fn check_hovik_passes() {
    let (code, out, _) = dpq(&["check", fixture("hovik.dpq").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.starts_with("dpq check: PASS\n"));
}

#[test]
fn exit_codes() {
    let hovik = fixture("hovik.dpq");
    let hovik = hovik.to_str().unwrap();
    assert_eq!(dpq(&["check", fixture("lie2.dpq").to_str().unwrap()]).0, 0);
    assert_eq!(dpq(&["quantize", fixture("lie2.dpq").to_str().unwrap()]).0, 0);
    assert_eq!(dpq(&["check", fixture("hovik-dg.dpq").to_str().unwrap()]).0, 1);
    let (code, _, err) = dpq(&["square", "--op", "xi^2", hovik]);
    assert_eq!(code, 2);
    assert!(err.contains("line 1, column 3"), "{err}");
    assert_eq!(dpq(&["linfty-quantize", hovik]).0, 2);
    assert_eq!(dpq(&["elw-quantize", fixture("lie2.dpq").to_str().unwrap()]).0, 2);
    assert_eq!(dpq(&["check", "/nonexistent/problem.dpq"]).0, 2);
    assert_eq!(dpq(&["check"]).0, 2);
}

#[test]
fn bound_flags_are_recorded() {
    let (code, out, _) = dpq(&[
        "--machine",
        "--weight-max",
        "5",
        "--base-deg-max",
        "5",
        "--hbar-max",
        "10",
        "quantize",
        fixture("hovik.dpq").to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    let r = Report::parse_machine(&out).unwrap();
    assert_eq!((r.bounds.weight_max, r.bounds.base_degree_max, r.bounds.hbar_max), (5, 5, 10));
    assert_eq!(r.get("cocycle"), Some("1/4 * p[z]"));
}

#[test]
fn runs_are_deterministic() {
    for (file, cmd) in [("hovik.dpq", "quantize"), ("lie2.dpq", "linfty-quantize"), ("elw-r1.dpq", "elw-quantize")] {
        let path = fixture(file);
        let a = dpq(&["--machine", cmd, path.to_str().unwrap()]);
        let b = dpq(&["--machine", cmd, path.to_str().unwrap()]);
        assert_eq!(a, b);
    }
}

#[test]
fn derived_bracket_on_hovik() {
    let op = format!("hbar^2*({DELTA2})");
    let (code, out, _) = dpq(&["--machine", "derived-bracket", "--op", &op, "--args", "xi,tau", fixture("hovik.dpq").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(Report::parse_machine(&out).unwrap().get("value"), Some("-tau"));
}

#[test]
fn sections_are_exclusive() {
    let text = "[manifold]\ncoord = x : 0\n[poisson]\n[linfty]\nfiber = t : 0\n";
    assert!(matches!(parse_problem(text, &Overrides::default()), Err(CliError::Syntax { .. })));
}
