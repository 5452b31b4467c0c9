//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p leanarch-cli --test acceptance`.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use leanarch::dsl::{
    parse_fpm, parse_model, parse_profile, parse_requirements, serialize_fpm, serialize_model, serialize_profile,
    serialize_requirements,
};
use leanarch::model::ProfileSet;
use leanarch::safety::compute_minimal_cut_sets;
use leanarch::scaffold::{FUNCTIONAL_PROFILE, PHYSICAL_PROFILE};
use serde_json::Value;
use support::{fixture_dir, gen, Fixture, MUTATIONS};
use tempfile::TempDir;

const AC1_MAX_RUNTIME: Duration = Duration::from_secs(2);
const AC3_MIN_CASES: usize = 50;
const AC3_MAX_RUNTIME: Duration = Duration::from_secs(30);
const AC5_CASES: u64 = 100;

type Outcome = Result<String, String>;

fn leanarch(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leanarch"))
        .arg("--project")
        .arg(dir)
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Result<Value, String> {
    serde_json::from_slice(&o.stdout).map_err(|e| format!("bad json: {e}"))
}

fn status(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn materialize(f: &Fixture) -> TempDir {
    let dir = tempfile::tempdir().expect("tempdir");
    f.write_to(dir.path());
    dir
}

fn error_codes(v: &Value) -> BTreeSet<String> {
    v["diagnostics"]
        .as_array()
        .into_iter()
        .flatten()
        .filter(|d| d["severity"] == "error")
        .map(|d| d["code"].as_str().unwrap_or_default().to_string())
        .collect()
}

fn ac1() -> Outcome {
    let dir = fixture_dir();
    let golden = dir.join("golden");
    let start = Instant::now();
    let check = leanarch(&dir, &["check"]);
    let elapsed = start.elapsed();
    ensure(status(&check) == 0, || format!("check exited {}: {}", status(&check), stdout(&check)))?;
    ensure(stdout(&check).contains(" 0 errors"), || stdout(&check))?;
    ensure(elapsed < AC1_MAX_RUNTIME, || format!("check took {elapsed:?}"))?;
    let cases: [(&[&str], &str); 5] = [
        (&["fha", "export"], "function_list.tsv"),
        (&["report", "breakdown", "--model", "Func"], "breakdown_Func.txt"),
        (&["report", "breakdown", "--model", "Phys"], "breakdown_Phys.txt"),
        (&["report", "matrix"], "trace_matrix.csv"),
        (&["fpm", "cutsets", "InabilityToDisengage"], "cutsets_InabilityToDisengage.txt"),
    ];
    for (args, file) in cases {
        let args: Vec<&str> = args.iter().copied().chain(["--stdout"]).collect();
        let o = leanarch(&dir, &args);
        let want = fs::read(golden.join(file)).map_err(|e| format!("{file}: {e}"))?;
        ensure(status(&o) == 0 && o.stdout == want, || format!("{file} differs from golden"))?;
    }
    Ok(format!("check clean in {} ms, 5 golden files identical", elapsed.as_millis()))
}

fn ac2() -> Outcome {
    for m in &MUTATIONS {
        let dir = materialize(&m.apply());
        let o = leanarch(dir.path(), &["check", "--format", "json"]);
        let got = error_codes(&json(&o)?);
        let want = BTreeSet::from([m.expect.to_string()]);
        ensure(got == want && status(&o) == 1, || format!("{}: got {got:?}, exit {}", m.name, status(&o)))?;
    }
    Ok(format!("{} mutations, each tripped exactly its rule", MUTATIONS.len()))
}

fn ac3() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for seed in 0..AC3_MIN_CASES as u64 * 2 {
        let case = gen::fpm_case(&mut gen::rng(seed), 12, 10);
        let fpm = parse_fpm(&case.text, "r.fpm").value.ok_or("generated fpm does not parse")?;
        let got: BTreeSet<BTreeSet<String>> = compute_minimal_cut_sets(&fpm, "T", None)
            .map_err(|e| e.to_string())?
            .cut_sets
            .iter()
            .map(|c| c.events.iter().cloned().collect())
            .collect();
        ensure(got == case.brute_force_cut_sets(), || format!("seed {seed} disagrees with brute force"))?;
        cases += 1;
    }
    let elapsed = start.elapsed();
    ensure(cases >= AC3_MIN_CASES && elapsed < AC3_MAX_RUNTIME, || format!("{cases} cases in {elapsed:?}"))?;
    Ok(format!("{cases} random models equal brute force in {} ms", elapsed.as_millis()))
}

fn ac4() -> Outcome {
    let top = ["fpm", "cutsets", "InabilityToDisengage", "--format", "json"];
    let mut single = Fixture::load();
    support::single_channel(&mut single);
    let dir = materialize(&single);
    let o = leanarch(dir.path(), &top);
    let v = json(&o)?;
    let spf: Vec<_> = v["diagnostics"].as_array().into_iter().flatten().filter(|d| d["code"] == "S-SPF-001").collect();
    ensure(spf.len() == 1 && error_codes(&v).len() == 1 && status(&o) == 1, || format!("single channel: {v}"))?;
    ensure(v["min_order"] == 1, || format!("single channel min order {}", v["min_order"]))?;

    let o = leanarch(&fixture_dir(), &top);
    let v = json(&o)?;
    ensure(error_codes(&v).is_empty() && status(&o) == 0, || format!("dual channel: {v}"))?;
    ensure(v["min_order"] == 2, || format!("dual channel min order {}", v["min_order"]))?;
    Ok("one S-SPF-001 with a single channel; none and min order 2 with two".into())
}

fn ac5() -> Outcome {
    let profiles = [FUNCTIONAL_PROFILE, PHYSICAL_PROFILE]
        .iter()
        .map(|t| parse_profile(t, "p.prof").value.map(|p| p.profile))
        .collect::<Option<Vec<_>>>()
        .ok_or("shipped profiles do not parse")?;
    let (profiles, _) = ProfileSet::build(profiles);
    for seed in 0..AC5_CASES {
        let r = gen::requirement_file(&mut gen::rng(seed));
        let back = parse_requirements(&serialize_requirements(&r), "r.req");
        ensure(back.diagnostics.is_empty() && back.value.as_ref() == Some(&r), || format!("requirements seed {seed}"))?;

        let p = gen::profile_file(&mut gen::rng(seed));
        let back = parse_profile(&serialize_profile(&p), "p.prof");
        ensure(back.diagnostics.is_empty() && back.value.as_ref() == Some(&p), || format!("profile seed {seed}"))?;

        let m = parse_model(&gen::model_text(&mut gen::rng(seed)), "m.arch", &profiles)
            .value
            .ok_or_else(|| format!("model seed {seed} does not parse"))?;
        let back = parse_model(&serialize_model(&m), "m.arch", &profiles);
        ensure(back.diagnostics.is_empty() && back.value.as_ref() == Some(&m), || format!("model seed {seed}"))?;

        let f = parse_fpm(&gen::fpm_case(&mut gen::rng(seed), 12, 10).text, "f.fpm").value.ok_or("fpm")?;
        let back = parse_fpm(&serialize_fpm(&f), "f.fpm");
        ensure(back.diagnostics.is_empty() && back.value.as_ref() == Some(&f), || format!("fpm seed {seed}"))?;
    }
    Ok(format!("{AC5_CASES} each of requirements, profiles, models and fpms"))
}

fn changes(o: &Output) -> Result<Value, String> {
    let v: Value = serde_json::from_slice(&o.stderr).map_err(|e| format!("bad sync report: {e}"))?;
    Ok(v[0]["changes"].clone())
}

fn is_empty_report(v: &Value) -> bool {
    v.as_object().is_some_and(|o| o.values().all(|x| x.as_array().is_some_and(Vec::is_empty)))
}

fn ac6() -> Outcome {
    let sync = ["fpm", "sync", "--model", "Phys", "--format", "json", "--stdout"];
    let base = Fixture::load();
    // A bare skeleton has no top events for the FHA links to name.
    let mut bare = base.clone();
    bare.edit_manifest("  fha_results [\"safety/fha_results.fha\"]\n", "");
    let dir = materialize(&bare);
    let built = leanarch(dir.path(), &["fpm", "build", "--model", "Phys", "--stdout"]);
    fs::write(dir.path().join("safety/physical.fpm"), &built.stdout).map_err(|e| e.to_string())?;
    let o = leanarch(dir.path(), &sync);
    ensure(status(&o) == 0 && is_empty_report(&changes(&o)?), || "sync of a fresh build is not empty".into())?;

    let mut mutated = base.clone();
    support::sync_scenario(&mut mutated);
    let dir = materialize(&mutated);
    let o = leanarch(dir.path(), &sync);
    ensure(status(&o) == 0, || String::from_utf8_lossy(&o.stderr).into_owned())?;
    let c = changes(&o)?;
    let list = |k: &str| c[k].as_array().cloned().unwrap_or_default();
    ensure(list("added_components") == [Value::from("Backup_Switch")], || format!("components {c}"))?;
    ensure(
        list("added_ports") == [Value::from("AP_Disconnect.DIS_In_06"), Value::from("AP_Disc_Switch.DIS_Out_09")]
            && list("removed_ports") == [Value::from("AP_Disc_Switch.DIS_Out_01")],
        || format!("ports {c}"),
    )?;
    ensure(list("added_edges").len() == 2 && list("removed_edges").len() == 1, || format!("edges {c}"))?;
    ensure(list("orphans").len() == 1, || format!("orphans {c}"))?;

    let before = parse_fpm(&base.files["safety/physical.fpm"], "a.fpm").value.ok_or("fixture fpm")?;
    let after = parse_fpm(&stdout(&o), "b.fpm").value.ok_or("synced fpm does not parse")?;
    for name in ["FCC_01", "AP_Disconnect"] {
        let (b, a) = (before.component(&[name.into()]), after.component(&[name.into()]));
        ensure(
            b.zip(a).is_some_and(|(b, a)| b.basic_events == a.basic_events && b.out_failures == a.out_failures),
            || format!("{name} annotations changed"),
        )?;
    }
    ensure(before.top_events == after.top_events, || "top events changed".into())?;

    fs::write(dir.path().join("safety/physical.fpm"), &o.stdout).map_err(|e| e.to_string())?;
    let again = leanarch(dir.path(), &sync);
    ensure(is_empty_report(&changes(&again)?), || format!("re-sync: {}", changes(&again).unwrap_or_default()))?;
    ensure(again.stdout == o.stdout, || "re-sync rewrote the fpm".into())?;
    Ok("added structure reported, annotations kept, 1 orphan, re-sync empty".into())
}

fn ac7() -> Outcome {
    let mut f = Fixture::load();
    f.edit_manifest("  fha_results [\"safety/fha_results.fha\"]\n", "");
    let dir = materialize(&f);
    let fha = dir.path().join("safety/fha_results.fha");
    let fha = fha.to_str().ok_or("path")?;
    let o = leanarch(dir.path(), &["fha", "import", fha, "--format", "json"]);
    let v = json(&o)?;
    ensure(status(&o) == 0 && v["stubs"] == serde_json::json!(["SAF-REQ-001"]), || format!("import: {v}"))?;
    ensure(v["results"][0]["fdal"] == "A", || format!("results: {}", v["results"]))?;
    let arch = fs::read_to_string(dir.path().join("out/fha/Func.arch")).map_err(|e| e.to_string())?;
    let engage = arch
        .split("component \"Engage/Disengage Autopilot Surface Control\"")
        .nth(1)
        .and_then(|rest| rest.split('}').next())
        .ok_or("function missing from exported model")?;
    ensure(engage.contains("fdal = A"), || format!("exported function: {engage}"))?;
    let req = fs::read_to_string(dir.path().join("out/fha/safety_requirements.req")).map_err(|e| e.to_string())?;
    let req = parse_requirements(&req, "s.req").value.ok_or("stub file does not parse")?;
    ensure(req.requirements.len() == 1 && !req.links.is_empty(), || "stub file".into())?;

    fs::write(dir.path().join("safety/fha_results.fha"), f.files["safety/fha_results.fha"].replace("fdal = A", "fdal = C"))
        .map_err(|e| e.to_string())?;
    let o = leanarch(dir.path(), &["fha", "import", fha, "--format", "json"]);
    let v = json(&o)?;
    ensure(status(&o) == 1 && error_codes(&v).contains("FHA-002"), || format!("mismatch: {v}"))?;
    ensure(v["stubs"].as_array().is_some_and(Vec::is_empty), || "mismatch created stubs".into())?;
    Ok("FDAL A set, one linked stub, mismatched FDAL rejected with FHA-002".into())
}

fn ac8() -> Outcome {
    let o = leanarch(&fixture_dir(), &["report", "compliance", "--format", "json", "--stdout"]);
    let v = json(&o)?;
    let objectives = v["objectives"].as_array().ok_or("no objectives")?;
    let row = |id: &str| objectives.iter().find(|x| x["id"] == id).cloned().unwrap_or_default();
    let expect = [
        ("full", "substantiated", &["2.1", "2.2", "2.3", "2.4", "2.5", "2.6", "4.2", "4.3", "4.4"][..]),
        ("partial", "substantiated", &["4.1", "5.1.1", "5.1.2"][..]),
        ("omitted", "not_assessed", &["3.0", "5.6", "5.7", "5.8"][..]),
    ];
    for (claimed, computed, ids) in expect {
        for id in ids {
            let r = row(id);
            ensure(r["claimed"] == claimed && r["status"] == computed, || format!("{id}: {r}"))?;
        }
    }

    let mut f = Fixture::load();
    f.edit_manifest("  fha_results [\"safety/fha_results.fha\"]\n", "");
    let dir = materialize(&f);
    let v = json(&leanarch(dir.path(), &["report", "compliance", "--format", "json", "--stdout"]))?;
    for id in ["5.1.1", "5.1.2"] {
        let r = v["objectives"].as_array().and_then(|a| a.iter().find(|x| x["id"] == id)).cloned().unwrap_or_default();
        ensure(r["status"] == "gaps_found", || format!("without FHA {id}: {r}"))?;
    }
    Ok("16 objectives as claimed; 5.1.x gaps found without FHA results".into())
}

fn ac9() -> Outcome {
    let mut f = Fixture::load();
    support::single_channel(&mut f);
    f.edit("requirements/links.req", "link SYS-REQ-003 satisfied_by \"Func.Autopilot Functions.Provide Pilot Disconnect Command\"\n", "");
    let dir = materialize(&f);
    let fha = dir.path().join("safety/fha_results.fha");
    let fha = fha.to_str().ok_or("path")?;
    let commands: Vec<Vec<&str>> = vec![
        vec!["check"],
        vec!["check", "--rules", "model"],
        vec!["trace", "SYS-REQ-001", "--forward"],
        vec!["trace", "Phys.AP_Disconnect.AP_Disconnect_SW"],
        vec!["coverage"],
        vec!["fha", "export"],
        vec!["fha", "import", fha],
        vec!["fpm", "build"],
        vec!["fpm", "sync"],
        vec!["fpm", "cutsets", "InabilityToDisengage"],
        vec!["fpm", "cutsets", "InabilityToDisengage", "--max-order", "1"],
        vec!["report", "compliance"],
        vec!["report", "breakdown"],
        vec!["report", "matrix"],
        vec!["report", "dot"],
        vec!["report", "dot", "--fpm"],
        vec!["bogus"],
    ];
    let mut runs = 0;
    for cmd in &commands {
        for extra in [&[][..], &["--stdout"][..], &["--format", "json", "--stdout"][..]] {
            let args: Vec<&str> = cmd.iter().chain(extra).copied().collect();
            let (a, b) = (leanarch(dir.path(), &args), leanarch(dir.path(), &args));
            ensure(a.stdout == b.stdout && a.stderr == b.stderr && a.status == b.status, || format!("{args:?} differs"))?;
            runs += 1;
        }
    }
    Ok(format!("{runs} invocations identical on repeat"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("AC1 golden fixture", ac1),
        ("AC2 mutation suite", ac2),
        ("AC3 cut-set oracle", ac3),
        ("AC4 single point of failure", ac4),
        ("AC5 round trips", ac5),
        ("AC6 fpm sync", ac6),
        ("AC7 fha import", ac7),
        ("AC8 compliance", ac8),
        ("AC9 determinism", ac9),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
