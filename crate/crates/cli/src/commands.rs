use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::net::SocketAddr;
use std::path::Path;
use std::time::{Duration, Instant};

use majorana_core::crosscheck::{crosscheck, CrosscheckConfig};
use majorana_core::games::magic_square::{self, magic_square_game, magic_square_observables, quantum_distribution, table_checks};
use majorana_core::games::noise::{self, noise_sweep, oracle_value, uniform_grid};
use majorana_core::games::{
    classical_bound, exact_from_f64, four_pair, game_value, identical_tables_bound, DeterministicStrategy, JointDistribution,
};
use majorana_core::gaussian::CovarianceMatrix;
use majorana_core::ghz::{exhaustive_encoding_scan, ghz_obstruction, random_accessible_state, scan_group, EncodingCandidate};
use majorana_core::oracle::DenseState;
use majorana_core::program::{stream_rng, Backend};
use majorana_core::protocols::{
    braids_are_local, corrected_distribution, dense_decode, dense_encode, derive_correction, direct_distribution, discrimination_probability,
    exact_total_variation, observation_distribution, sampled_two_sample_test, unassisted_capacity_check, DenseCodeSetup, InputScenario,
    TeleportSetup,
};
use majorana_core::{AccessibleState, Rational};
use majorana_net::conformance::{read_capture, validate_session};
use majorana_net::party::{run_party, PartyConfig, Strategy};
use majorana_net::referee::{bind, run_referee, RefereeConfig};
use majorana_net::source::{source_generate, split, write_tape, Tape};
use majorana_net::{Mode, Role};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{BackendKind, Cli, CliError, Command, ModeArg, Output, RoleArg, ScenarioArg, ServeArgs, StrategyArg};

type Result<T> = std::result::Result<T, CliError>;

/// Significance level of the sampled teleportation test.
const ALPHA: f64 = 1e-3;
const FLOAT_TOLERANCE: f64 = 1e-9;

pub fn run_command(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::MagicSquare { exact, trials } => magic_square_cmd(cli, *exact, *trials),
        Command::ClassicalBound => classical_bound_cmd(cli),
        Command::FourPair => four_pair_cmd(cli),
        Command::GhzScan {
            trials,
            min_pairs,
            max_pairs,
        } => ghz_scan_cmd(cli, *trials, *min_pairs, *max_pairs),
        Command::GhzEncoding { parties, block } => ghz_encoding_cmd(cli, *parties, *block),
        Command::Teleport { scenario, trials } => teleport_cmd(cli, *scenario, *trials),
        Command::DenseCode { modes, ancilla } => dense_code_cmd(cli, *modes, *ancilla),
        Command::NoiseSweep { points, rounds } => noise_sweep_cmd(cli, *points, *rounds),
        Command::Serve(args) => serve_cmd(cli, args),
        Command::SourceGen { rounds, alice_out, bob_out } => source_gen_cmd(cli, *rounds, alice_out, bob_out),
        Command::Crosscheck {
            pairs,
            depth,
            enumeration_pairs,
            random_pairs,
            random_programs,
        } => {
            let config = CrosscheckConfig {
                max_pairs: *pairs,
                depth: *depth,
                enumeration_pairs: *enumeration_pairs,
                random_pairs: *random_pairs,
                random_programs: *random_programs,
                seed: cli.seed,
            };
            let report = crosscheck(&config)?;
            let passed = report.mismatches == 0;
            Ok(output(
                cli,
                None,
                json!({ "report": report, "verdict": report.verdict, "mismatches": report.mismatches }),
                passed,
            ))
        }
    }
}

/// Adds the fields every report carries.
fn output(cli: &Cli, backend: Option<BackendKind>, body: Value, passed: bool) -> Output {
    let mut json = json!({ "command": cli.command.name(), "seed": cli.seed, "passed": passed });
    if let Some(b) = backend {
        json["backend"] = json!(b.name());
    }
    if let (Value::Object(dst), Value::Object(src)) = (&mut json, body) {
        dst.extend(src);
    }
    Output { json, csv: None, passed }
}

fn rational(r: &Rational) -> Value {
    if *r.denom() == 1 {
        json!(*r.numer())
    } else {
        json!(*r.numer() as f64 / *r.denom() as f64)
    }
}

fn to_f64(d: &JointDistribution<Rational>) -> JointDistribution<f64> {
    d.map(|r| *r.numer() as f64 / *r.denom() as f64)
}

fn backend_or(cli: &Cli, default: BackendKind, allowed: &[BackendKind]) -> Result<BackendKind> {
    let b = cli.backend.unwrap_or(default);
    if !allowed.contains(&b) {
        return Err(CliError::Usage(format!(
            "{} does not support the {} backend",
            cli.command.name(),
            b.name()
        )));
    }
    Ok(b)
}

/// Runs `f` on `state` converted to the chosen backend.
macro_rules! on_backend {
    ($kind:expr, $state:expr, |$b:ident| $body:expr) => {
        match $kind {
            BackendKind::Stabilizer => {
                let $b = $state.clone();
                $body
            }
            BackendKind::Gaussian => {
                let $b = CovarianceMatrix::from_state(&$state);
                $body
            }
            BackendKind::Oracle => {
                let $b = DenseState::from_accessible(&$state)?;
                $body
            }
        }
    };
}

/// Compares a simulated distribution with an exact target: exactly on the
/// stabilizer backend, within `FLOAT_TOLERANCE` otherwise.
fn compare(kind: BackendKind, simulated: &JointDistribution<f64>, target: &JointDistribution<Rational>) -> Result<(bool, f64)> {
    let diff = simulated.max_abs_difference(&to_f64(target));
    let ok = match kind {
        BackendKind::Stabilizer => exact_from_f64(simulated)? == *target,
        _ => diff <= FLOAT_TOLERANCE,
    };
    Ok((ok, diff))
}

fn magic_square_cmd(cli: &Cli, exact: bool, trials: u64) -> Result<Output> {
    let all = [BackendKind::Stabilizer, BackendKind::Gaussian, BackendKind::Oracle];
    let kind = backend_or(cli, BackendKind::Stabilizer, &all)?;
    let game = magic_square_game();
    let p_star = quantum_distribution();
    let value = game_value(&game, &p_star)?;
    let square = magic_square_observables()?;
    let checks = table_checks(&square)?;
    let checks_passed = checks.iter().filter(|c| c.ok).count();
    let shared = AccessibleState::canonical_shared(magic_square::N_PAIRS)?;
    let simulated = on_backend!(kind, shared, |b| magic_square::simulated_distribution(&b)?);
    let (matches, deviation) = compare(kind, &simulated, &p_star)?;
    let simulated_value = game_value(&game, &simulated)?;
    let sampled = if exact || trials == 0 {
        Value::Null
    } else {
        let (g, se) = noise::monte_carlo(&noise::depolarized_resource(0.0)?, trials, &mut stream_rng(cli.seed, 0))?;
        json!({ "rounds": trials, "g_hat": g, "stderr": se, "simulator": "gaussian" })
    };
    let passed = value == Rational::from_integer(9) && checks_passed == checks.len() && matches;
    Ok(output(
        cli,
        Some(kind),
        json!({
            "quantum_value": rational(&value),
            "quantum_value_exact": value.to_string(),
            "table_checks": { "total": checks.len(), "passed": checks_passed, "checks": checks },
            "simulated_value": simulated_value,
            "simulation_matches_p_star": matches,
            "max_abs_deviation": deviation,
            "non_signalling": p_star.is_non_signalling(),
            "sampled": sampled,
        }),
        passed,
    ))
}

fn classical_bound_cmd(cli: &Cli) -> Result<Output> {
    let game = magic_square_game();
    let bound = classical_bound(&game);
    let identical = identical_tables_bound(&game)?;
    let strategy = bound
        .strategy()
        .ok_or_else(|| CliError::Runtime("maximizer is not a table strategy".into()))?;
    let strategy_value = game_value(&game, &strategy.distribution())?;
    let identical_strategy = identical.strategy();
    let passed = bound.value == Rational::from_integer(7) && identical.value == Rational::from_integer(3) && strategy_value == bound.value;
    Ok(output(
        cli,
        None,
        json!({
            "bound": rational(&bound.value),
            "bound_exact": bound.value.to_string(),
            "pairs_checked": bound.pairs_checked,
            "strategy": strategy,
            "strategy_value": rational(&strategy_value),
            "identical_tables_bound": rational(&identical.value),
            "identical_pairs_checked": identical.pairs_checked,
            "identical_strategy": identical_strategy,
            "table2_value": rational(&game_value(&game, &DeterministicStrategy::table2().distribution())?),
        }),
        passed,
    ))
}

fn four_pair_cmd(cli: &Cli) -> Result<Output> {
    let all = [BackendKind::Stabilizer, BackendKind::Gaussian, BackendKind::Oracle];
    let kind = backend_or(cli, BackendKind::Stabilizer, &all)?;
    let target = four_pair::four_pair_distribution();
    let lhv = four_pair::four_pair_lhv();
    let shared = AccessibleState::canonical_shared(four_pair::N_PAIRS)?;
    let simulated = on_backend!(kind, shared, |b| four_pair::simulated_distribution(&b)?);
    let (sim_ok, deviation) = compare(kind, &simulated, &target)?;
    let n = target.n_outcomes();
    let mut entries = 0u64;
    let mut lhv_mismatches = 0u64;
    for (j, k) in target.settings_pairs() {
        for a in 0..n {
            for b in 0..n {
                entries += 1;
                lhv_mismatches += u64::from(lhv.at(j, k, a, b) != target.at(j, k, a, b));
            }
        }
    }
    let passed = sim_ok && lhv_mismatches == 0 && target.is_normalized() && target.is_non_signalling();
    Ok(output(
        cli,
        Some(kind),
        json!({
            "entries_compared": entries,
            "lhv_mismatches": lhv_mismatches,
            "lhv_matches": lhv_mismatches == 0,
            "hidden_variables": four_pair::HiddenVariable::all().len(),
            "simulation_matches": sim_ok,
            "max_abs_deviation": deviation,
            "normalized": target.is_normalized(),
            "non_signalling": target.is_non_signalling(),
            "distribution": target.to_json(),
        }),
        passed,
    ))
}

fn ghz_scan_cmd(cli: &Cli, trials: u64, min_pairs: usize, max_pairs: usize) -> Result<Output> {
    let all = [BackendKind::Stabilizer, BackendKind::Gaussian, BackendKind::Oracle];
    let kind = backend_or(cli, BackendKind::Stabilizer, &all)?;
    if min_pairs == 0 || min_pairs > max_pairs {
        return Err(CliError::Usage(format!("bad pair range {min_pairs}..={max_pairs}")));
    }
    if kind == BackendKind::Oracle && 2 * max_pairs > majorana_core::oracle::MAX_ORACLE_MODES {
        return Err(CliError::Usage(format!(
            "the oracle backend refuses {} modes (limit {})",
            2 * max_pairs,
            majorana_core::oracle::MAX_ORACLE_MODES
        )));
    }
    let span = (max_pairs - min_pairs + 1) as u64;
    // trial t draws its state from stream t; with a non-stabilizer backend
    // each state's generators are re-checked there
    let (report, backend_failures) = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<_> {
            let mut rng = stream_rng(cli.seed, t);
            let state = random_accessible_state(min_pairs + (t % span) as usize, &mut rng)?;
            let mut failures = 0u64;
            match kind {
                BackendKind::Stabilizer => {}
                BackendKind::Gaussian => {
                    let g = CovarianceMatrix::from_state(&state);
                    failures += state
                        .pairs()
                        .iter()
                        .filter(|p| (g.get(p.j, p.k) - p.sign as f64).abs() > FLOAT_TOLERANCE)
                        .count() as u64;
                }
                BackendKind::Oracle => {
                    let d = DenseState::from_accessible(&state)?;
                    for s in state.generators() {
                        failures += u64::from((d.expectation(&s)?.re - 1.0).abs() > FLOAT_TOLERANCE);
                    }
                }
            }
            Ok((scan_group(&state.stabilizer_group()), failures))
        })
        .try_reduce(|| (scan_group(&[]), 0), |a, b| Ok((merge_scans(a.0, b.0), a.1 + b.1)))?;
    let passed = report.violation_count == 0 && backend_failures == 0;
    Ok(output(
        cli,
        Some(kind),
        json!({
            "states": trials,
            "min_pairs": min_pairs,
            "max_pairs": max_pairs,
            "backend_failures": backend_failures,
            "report": report,
            "verdict": if passed { "pass" } else { "fail" },
        }),
        passed,
    ))
}

fn merge_scans(a: majorana_core::ghz::ScanReport, b: majorana_core::ghz::ScanReport) -> majorana_core::ghz::ScanReport {
    let mut violations = a.violations;
    let room = majorana_core::ghz::MAX_LISTED_VIOLATIONS.saturating_sub(violations.len());
    violations.extend(b.violations.into_iter().take(room));
    let count = a.violation_count + b.violation_count;
    majorana_core::ghz::ScanReport {
        checked: a.checked + b.checked,
        pairs_checked: a.pairs_checked + b.pairs_checked,
        triples_checked: a.triples_checked + b.triples_checked,
        violation_count: count,
        violations,
        verdict: if count == 0 { "pass".into() } else { "fail".into() },
    }
}

fn ghz_encoding_cmd(cli: &Cli, parties: usize, block: usize) -> Result<Output> {
    let canonical = EncodingCandidate::canonical(parties)?;
    let obstruction = ghz_obstruction(&canonical)?;
    let scan = if block == 0 { None } else { Some(exhaustive_encoding_scan(block)?) };
    let scan_ok = scan.as_ref().is_none_or(|s| s.even_parity_candidates == 0 && s.identity_failures == 0);
    let passed = obstruction.obstruction_holds && obstruction.parity_sum % 2 == 1 && scan_ok;
    Ok(output(
        cli,
        None,
        json!({
            "parties": parties,
            "canonical": canonical,
            "obstruction": obstruction,
            "parity_sum": obstruction.parity_sum,
            "scan": scan,
        }),
        passed,
    ))
}

fn teleport_cmd(cli: &Cli, scenario: ScenarioArg, trials: u64) -> Result<Output> {
    let all = [BackendKind::Stabilizer, BackendKind::Gaussian, BackendKind::Oracle];
    let kind = backend_or(cli, BackendKind::Stabilizer, &all)?;
    let scenarios: Vec<InputScenario> = match scenario {
        ScenarioArg::Braided => vec![InputScenario::Braided],
        ScenarioArg::Plain => vec![InputScenario::Plain],
        ScenarioArg::Both => vec![InputScenario::Braided, InputScenario::Plain],
    };
    let rule = derive_correction()?;
    let mut passed = true;
    let mut reports = Vec::new();
    for s in scenarios {
        let setup = TeleportSetup::new(s);
        let prepared = setup.prepare()?;
        let (corrected, direct, fixture) = on_backend!(kind, prepared, |b| {
            let obs = observation_distribution(&b)?;
            let fixture: Vec<[i8; 2]> = obs
                .iter()
                .filter(|((m, _), p)| *m == [-1; 4] && **p > 0.0)
                .map(|((_, r), _)| *r)
                .collect();
            (corrected_distribution(&b)?, direct_distribution(&b)?, fixture)
        });
        let tv = majorana_core::protocols::total_variation(&corrected, &direct);
        let exact_tv = match kind {
            BackendKind::Stabilizer => Some(exact_total_variation(&corrected, &direct)?),
            _ => None,
        };
        let tv_ok = match &exact_tv {
            Some(r) => *r == Rational::from_integer(0),
            None => tv <= FLOAT_TOLERANCE,
        };
        let sampled = if trials > 0 {
            Some(sampled_two_sample_test(&setup, trials, cli.seed)?)
        } else {
            None
        };
        let sampled_ok = sampled.as_ref().is_none_or(|t| t.p_value > ALPHA);
        // the fixture is stated for the unbraided input
        let fixture_ok = s != InputScenario::Plain || fixture == vec![[1, 1]];
        passed &= tv_ok && sampled_ok && fixture_ok;
        let key = |o: &[i8; 2]| format!("{:+},{:+}", o[0], o[1]);
        reports.push(json!({
            "scenario": s,
            "total_variation": tv,
            "total_variation_exact": exact_tv.map(|r| r.to_string()),
            "corrected": corrected.iter().map(|(o, p)| (key(o), json!(p))).collect::<serde_json::Map<_, _>>(),
            "direct": direct.iter().map(|(o, p)| (key(o), json!(p))).collect::<serde_json::Map<_, _>>(),
            "fixture_outcomes": fixture,
            "fixture_ok": fixture_ok,
            "sampled": sampled,
            "sampled_ok": sampled_ok,
        }));
    }
    let braided = TeleportSetup::new(InputScenario::Braided).prepare()?;
    let plain = TeleportSetup::new(InputScenario::Plain).prepare()?;
    let discrimination = discrimination_probability(&braided, &plain)?;
    passed &= discrimination < 1.0;
    Ok(output(
        cli,
        Some(kind),
        json!({
            "correction_signs": rule.signs,
            "scenarios": reports,
            "significance": ALPHA,
            "trials": trials,
            "discrimination_probability": discrimination,
        }),
        passed,
    ))
}

fn dense_code_cmd(cli: &Cli, modes: usize, ancilla: usize) -> Result<Output> {
    let all = [BackendKind::Stabilizer, BackendKind::Gaussian, BackendKind::Oracle];
    let kind = backend_or(cli, BackendKind::Stabilizer, &all)?;
    let setup = DenseCodeSetup;
    let mut messages = Vec::new();
    let mut successes = 0;
    for bits in [[0u8, 0], [0, 1], [1, 0], [1, 1]] {
        let enc = dense_encode(&setup, bits)?;
        let decoded = match kind {
            BackendKind::Stabilizer => dense_decode(&enc.state)?,
            _ => on_backend!(kind, enc.state, |b| decode_on(&b)?),
        };
        let local = braids_are_local(&enc.braids);
        let ok = decoded == bits && local;
        successes += usize::from(ok);
        messages.push(json!({
            "bits": bits,
            "braids": enc.braids.iter().map(|e| e.operator.clone()).collect::<Vec<_>>(),
            "state": enc.state.to_string(),
            "decoded": decoded,
            "local": local,
            "ok": ok,
        }));
    }
    let capacity = unassisted_capacity_check(modes, ancilla)?;
    let capacity_ok = modes != 2 || ancilla == 0 || (capacity.distinguishable_set.len() == 2 && capacity.bits == 1.0);
    Ok(output(
        cli,
        Some(kind),
        json!({
            "messages": messages,
            "successes": successes,
            "capacity": capacity,
        }),
        successes == 4 && capacity_ok,
    ))
}

/// Reads the two bits from the charges of `(a1, b1)` and `(a2, b2)`, which
/// must be deterministic.
fn decode_on<B: Backend>(state: &B) -> Result<[u8; 2]> {
    let mut bits = [0u8; 2];
    for (slot, (j, k)) in [(1, 5), (2, 6)].into_iter().enumerate() {
        let p = state.plus_probability(j, k)?;
        bits[slot] = if p > 1.0 - FLOAT_TOLERANCE {
            0
        } else if p < FLOAT_TOLERANCE {
            1
        } else {
            return Err(CliError::Runtime(format!("charge of ({j}, {k}) is not deterministic: P(+1) = {p}")));
        };
    }
    Ok(bits)
}

fn noise_sweep_cmd(cli: &Cli, points: usize, rounds: u64) -> Result<Output> {
    let kind = backend_or(cli, BackendKind::Gaussian, &[BackendKind::Gaussian, BackendKind::Oracle])?;
    if points < 2 {
        return Err(CliError::Usage("the sweep needs at least 2 grid points".into()));
    }
    let sweep = noise_sweep(&uniform_grid(points), rounds, cli.seed)?;
    let monotone = sweep.is_monotone_non_increasing(1e-12);
    let first = &sweep.points[0];
    let last = &sweep.points[points - 1];
    // exact rational check of G(0): the noiseless resource is a stabilizer state
    let g0_exact = game_value(&magic_square_game(), &magic_square::simulated_quantum_distribution()?)?;
    let oracle_points = match kind {
        BackendKind::Oracle => Some(
            sweep
                .points
                .par_iter()
                .map(|p| oracle_value(p.eps))
                .collect::<majorana_core::Result<Vec<_>>>()?,
        ),
        _ => None,
    };
    let oracle_deviation = oracle_points
        .as_ref()
        .map(|o| o.iter().zip(&sweep.points).map(|(x, p)| (x - p.g_exact).abs()).fold(0.0, f64::max));
    let threshold_ok = sweep
        .threshold
        .as_ref()
        .is_some_and(|t| (t.oracle_lower - t.g_lower).abs() <= 1e-6 && (t.oracle_upper - t.g_upper).abs() <= 1e-6);
    let g1_ok = match (last.g_mc, last.stderr) {
        (Some(g), Some(se)) if se > 0.0 => g.abs() <= 5.0 * se,
        (Some(g), _) => g == 0.0,
        _ => last.g_exact.abs() <= FLOAT_TOLERANCE,
    };
    let passed = g0_exact == Rational::from_integer(9)
        && (first.g_exact - 9.0).abs() <= FLOAT_TOLERANCE
        && monotone
        && threshold_ok
        && g1_ok
        && oracle_deviation.is_none_or(|d| d <= 1e-6);
    let csv = sweep.to_csv();
    let mut out = output(
        cli,
        Some(kind),
        json!({
            "g0_exact": g0_exact.to_string(),
            "monotone_non_increasing": monotone,
            "g1": { "exact": last.g_exact, "mc": last.g_mc, "stderr": last.stderr, "within_5_sigma": g1_ok },
            "threshold": sweep.threshold,
            "oracle_values": oracle_points,
            "oracle_max_deviation": oracle_deviation,
            "sweep": sweep,
        }),
        passed,
    );
    out.csv = Some(csv);
    Ok(out)
}

fn source_gen_cmd(cli: &Cli, rounds: u64, alice_out: &Path, bob_out: &Path) -> Result<Output> {
    if rounds == 0 {
        return Err(CliError::Usage("--rounds must be at least 1".into()));
    }
    let records = source_generate(rounds, cli.seed);
    let (a, b) = split(&records);
    write_tape(&mut BufWriter::new(File::create(alice_out)?), &a)?;
    write_tape(&mut BufWriter::new(File::create(bob_out)?), &b)?;
    Ok(output(
        cli,
        None,
        json!({
            "rounds": rounds,
            "records": records.len(),
            "alice_tape": alice_out.display().to_string(),
            "bob_tape": bob_out.display().to_string(),
        }),
        true,
    ))
}

fn serve_cmd(cli: &Cli, args: &ServeArgs) -> Result<Output> {
    let mode = match args.mode {
        ModeArg::Quantum => Mode::QuantumEmulated,
        ModeArg::Lhv => Mode::Lhv,
    };
    let timeout = Duration::from_millis(args.timeout_ms);
    match args.role {
        RoleArg::Referee => {
            if args.rounds == 0 {
                return Err(CliError::Usage("--rounds must be at least 1".into()));
            }
            let listener = bind(&args.bind, args.addr_file.as_deref())?;
            let config = RefereeConfig {
                rounds: args.rounds,
                mode,
                seed: cli.seed,
                timeout,
                capture: args.capture.clone(),
            };
            let summary = run_referee(&listener, &config)?;
            let conformance = match &args.capture {
                Some(p) => Some(validate_session(&read_capture(BufReader::new(File::open(p)?))?)),
                None => None,
            };
            let passed = conformance.as_ref().is_none_or(|c| c.passed());
            Ok(output(
                cli,
                None,
                json!({ "role": "referee", "summary": summary, "conformance": conformance }),
                passed,
            ))
        }
        RoleArg::Alice | RoleArg::Bob => {
            let role = if args.role == RoleArg::Alice { Role::Alice } else { Role::Bob };
            let strategy = match mode {
                Mode::QuantumEmulated => {
                    let path = args.tape.as_ref().ok_or_else(|| CliError::Usage("quantum mode needs --tape".into()))?;
                    Strategy::Tape(Tape::read(role, BufReader::new(File::open(path)?))?)
                }
                Mode::Lhv => Strategy::Table(match args.strategy {
                    StrategyArg::Table2 => DeterministicStrategy::table2(),
                    StrategyArg::Identical => identical_tables_bound(&magic_square_game())?
                        .strategy()
                        .ok_or_else(|| CliError::Runtime("no identical-table maximizer".into()))?,
                }),
            };
            let addr = match (&args.connect, &args.addr_file) {
                (Some(a), _) => a.clone(),
                (None, Some(f)) => wait_for_address(f, Duration::from_secs(30))?,
                (None, None) => return Err(CliError::Usage("parties need --connect or --addr-file".into())),
            };
            let addr: SocketAddr = addr.trim().parse().map_err(|e| CliError::Usage(format!("bad address `{addr}`: {e}")))?;
            let report = run_party(addr, &PartyConfig::new(role, strategy))?;
            Ok(output(
                cli,
                None,
                json!({
                    "role": role,
                    "answered": report.answered,
                    "refused": report.refused,
                    "summary": report.summary,
                }),
                true,
            ))
        }
    }
}

fn wait_for_address(path: &Path, patience: Duration) -> Result<String> {
    let start = Instant::now();
    loop {
        if let Ok(s) = std::fs::read_to_string(path) {
            if !s.trim().is_empty() {
                return Ok(s);
            }
        }
        if start.elapsed() > patience {
            return Err(CliError::Runtime(format!("no referee address in {} after {patience:?}", path.display())));
        }
        std::thread::sleep(Duration::from_millis(20));
    }
}
