mod support;

use std::collections::{BTreeSet, HashMap};

use leanarch::diag::codes;
use leanarch::dsl::{parse_fha, parse_model};
use leanarch::model::{Dal, ElementPath, ModelKind};
use leanarch::requirements::{trace_chain, ArtifactRef, Direction, LinkType};
use leanarch::safety::{build_fpm, check_against_safety_requirements, compute_minimal_cut_sets, import_fha_results, sync_fpm};
use leanarch::scaffold::{FUNCTIONAL_PROFILE, PHYSICAL_PROFILE};
use leanarch::validation::{run_rules, RuleRegistry, Selection};
use leanarch::{Diagnostic, Execution, Project, Severity};
use support::{Fixture, MUTATIONS};

fn func(name: &str) -> ElementPath {
    ElementPath::new("Func", vec!["Autopilot Functions".into(), name.into()])
}

fn phys(segs: &[&str]) -> ElementPath {
    ElementPath::new("Phys", segs.iter().map(|s| s.to_string()).collect())
}

fn loaded(f: &Fixture) -> Project {
    let load = f.project();
    assert!(load.diagnostics.is_empty(), "{:#?}", load.diagnostics);
    load.project
}

fn attr(e: &leanarch::model::ArchElement, name: &str) -> Option<leanarch::model::AttrValue> {
    e.stereotypes.iter().find_map(|s| s.value(name)).cloned()
}

fn check(p: &Project) -> Vec<Diagnostic> {
    let (reg, diags) = RuleRegistry::for_project(p);
    assert!(diags.is_empty(), "{diags:?}");
    run_rules(p, &reg, &Selection::All, Execution::default()).unwrap().diagnostics
}

fn error_codes(ds: &[Diagnostic]) -> BTreeSet<&str> {
    ds.iter().filter(|d| d.severity == Severity::Error).map(|d| d.code.as_str()).collect()
}

#[test]
fn golden_fixture_is_clean() {
    let p = loaded(&Fixture::load());
    assert!(check(&p).is_empty());
    assert_eq!(p.models.len(), 2);
    assert_eq!(p.requirements.len(), 12);
    assert_eq!(p.fha.len(), 1);
}

#[test]
fn shipped_profiles_match_fixture_copies() {
    let f = Fixture::load();
    assert_eq!(f.files["profiles/functional.prof"], FUNCTIONAL_PROFILE);
    assert_eq!(f.files["profiles/physical.prof"], PHYSICAL_PROFILE);
}

#[test]
fn sequential_and_parallel_loads_agree() {
    let f = Fixture::load();
    let a = f.load_with(Execution::Sequential);
    let b = f.load_with(Execution::Parallel);
    assert_eq!(a.diagnostics, b.diagnostics);
    assert_eq!(a.project.models, b.project.models);
    assert_eq!(a.project.links, b.project.links);
    let m = MUTATIONS[4].apply();
    let (pa, pb) = (m.load_with(Execution::Sequential).project, m.load_with(Execution::Parallel).project);
    let reg = RuleRegistry::for_project(&pa).0;
    let ra = run_rules(&pa, &reg, &Selection::All, Execution::Sequential).unwrap();
    let rb = run_rules(&pb, &reg, &Selection::All, Execution::Parallel).unwrap();
    assert_eq!(ra.diagnostics, rb.diagnostics);
    assert_eq!(ra.counts, rb.counts);
}

#[test]
fn each_mutation_trips_exactly_its_rule() {
    for m in &MUTATIONS {
        let p = m.apply().project();
        assert!(!p.has_errors(), "{}: {:?}", m.name, p.diagnostics);
        let ds = check(&p.project);
        assert_eq!(error_codes(&ds), BTreeSet::from([m.expect]), "{}: {ds:#?}", m.name);
    }
}

#[test]
fn rule_selection() {
    let p = MUTATIONS[2].apply().project().project;
    let reg = RuleRegistry::for_project(&p).0;
    let model = run_rules(&p, &reg, &Selection::parse("model"), Execution::default()).unwrap();
    assert!(model.diagnostics.iter().any(|d| d.code == "M-PORT-001"));
    assert!(model.counts.iter().all(|c| c.code.starts_with("M-")));
    let one = run_rules(&p, &reg, &Selection::parse("P-NAME-001"), Execution::default()).unwrap();
    assert_eq!(one.counts.len(), 1);
    assert!(run_rules(&p, &reg, &Selection::parse("NOPE-001"), Execution::default()).is_err());
}

#[test]
fn severity_override_from_manifest() {
    let mut f = MUTATIONS[4].apply();
    f.edit_manifest("  naming {", "  severity {\n    P-CONN-001 = error\n    M-EXCH-001 = info\n  }\n  naming {");
    let ds = check(&f.project().project);
    assert_eq!(error_codes(&ds), BTreeSet::from(["P-CONN-001"]));
    assert!(ds.iter().any(|d| d.code == "M-EXCH-001" && d.severity == Severity::Info));
}

#[test]
fn upstream_trace_of_software_item() {
    let p = loaded(&Fixture::load());
    let sw = ArtifactRef::element(phys(&["AP_Disconnect", "AP_Disconnect_SW"]));
    let chains = trace_chain(&p, &sw, Direction::Upstream).unwrap();
    let engage = ArtifactRef::element(func("Engage/Disengage Autopilot Surface Control"));
    let unit = ArtifactRef::element(phys(&["AP_Disconnect"]));
    let item = ArtifactRef::req("ITEM-REQ-002");
    let expected: BTreeSet<Vec<ArtifactRef>> = [
        vec![ArtifactRef::req("SYS-REQ-001"), item.clone(), sw.clone()],
        vec![ArtifactRef::req("SYS-REQ-001"), engage.clone(), unit.clone(), item.clone(), sw.clone()],
        vec![ArtifactRef::req("SAF-REQ-001"), engage, unit, item, sw],
    ]
    .into_iter()
    .collect();
    assert_eq!(chains.into_iter().collect::<BTreeSet<_>>(), expected);
}

/// Every maximal path through the link graph, found by plain DFS over the
/// raw links with the documented edge orientation.
fn oracle_chains(p: &Project, from: &ArtifactRef, dir: Direction) -> BTreeSet<Vec<ArtifactRef>> {
    let mut next: HashMap<&ArtifactRef, Vec<&ArtifactRef>> = HashMap::new();
    for l in &p.links {
        let (up, down) = match l.link_type {
            LinkType::Refines | LinkType::DerivesFrom => (&l.target, &l.source),
            LinkType::SatisfiedBy | LinkType::AllocatedTo => (&l.source, &l.target),
            _ => continue,
        };
        let (a, b) = if dir == Direction::Downstream { (up, down) } else { (down, up) };
        next.entry(a).or_default().push(b);
    }
    fn walk<'a>(
        at: &'a ArtifactRef,
        next: &HashMap<&'a ArtifactRef, Vec<&'a ArtifactRef>>,
        path: &mut Vec<ArtifactRef>,
        out: &mut BTreeSet<Vec<ArtifactRef>>,
    ) {
        path.push(at.clone());
        match next.get(at) {
            Some(ns) if !ns.is_empty() => ns.iter().for_each(|n| walk(n, next, path, out)),
            _ => {
                out.insert(path.clone());
            }
        }
        path.pop();
    }
    let mut out = BTreeSet::new();
    walk(from, &next, &mut Vec::new(), &mut out);
    if dir == Direction::Upstream {
        out = out.into_iter().map(|mut c| {
            c.reverse();
            c
        }).collect();
    }
    out
}

#[test]
fn trace_chains_match_dfs_oracle() {
    let p = loaded(&Fixture::load());
    let mut artifacts: Vec<ArtifactRef> = p.requirements.iter().map(|r| ArtifactRef::req(r.id.clone())).collect();
    for m in &p.models {
        artifacts.extend(m.walk().into_iter().map(|(segs, _)| ArtifactRef::element(m.path_of(&segs))));
    }
    for a in &artifacts {
        for dir in [Direction::Upstream, Direction::Downstream] {
            let got: BTreeSet<_> = trace_chain(&p, a, dir).unwrap().into_iter().collect();
            assert_eq!(got, oracle_chains(&p, a, dir), "{a} {dir:?}");
        }
    }
}

#[test]
fn trace_cycle_is_reported() {
    let mut f = Fixture::load();
    f.edit("requirements/links.req", "link ITEM-REQ-001 refines SYS-REQ-002\n", "link ITEM-REQ-001 refines SYS-REQ-002\nlink SYS-REQ-002 refines ITEM-REQ-001\n");
    let p = f.project().project;
    assert!(trace_chain(&p, &ArtifactRef::req("ITEM-REQ-001"), Direction::Upstream).is_err());
    assert!(error_codes(&check(&p)).contains("R-LINK-001"));
}

#[test]
fn allocation_queries() {
    let p = loaded(&Fixture::load());
    assert_eq!(p.allocated_to(&func("Compute Autopilot Commands")), vec![phys(&["FCC_01"])]);
    assert_eq!(
        p.allocated_from(&phys(&["AP_Disconnect"])),
        vec![func("Engage/Disengage Autopilot Surface Control")]
    );
    assert!(p.allocate(&phys(&["FCC_01"]), &func("Compute Autopilot Commands")).is_err());
    let a = p.allocate(&func("Actuate Control Surfaces"), &phys(&["FCC_01"])).unwrap();
    let q = p.with_allocation(&a).unwrap();
    assert_eq!(q.allocated_to(&func("Actuate Control Surfaces")).len(), 2);
    assert_eq!(p.allocated_to(&func("Actuate Control Surfaces")).len(), 1);
}

/// Union-find over representatives; independent of the rule's BFS.
fn expected_unrealized(p: &Project) -> usize {
    let m = p.model("Phys").unwrap();
    let ends: BTreeSet<Vec<String>> =
        m.connectors.iter().flat_map(|c| [c.source.element.clone(), c.target.element.clone()]).collect();
    let rep = |segs: &[String]| -> Vec<String> {
        (1..=segs.len()).rev().map(|n| segs[..n].to_vec()).find(|s| ends.contains(s)).unwrap_or(segs.to_vec())
    };
    let mut parent: HashMap<Vec<String>, Vec<String>> = HashMap::new();
    fn find(parent: &mut HashMap<Vec<String>, Vec<String>>, x: &[String]) -> Vec<String> {
        let p = parent.get(x).cloned().unwrap_or(x.to_vec());
        if p == x {
            return p;
        }
        let root = find(parent, &p);
        parent.insert(x.to_vec(), root.clone());
        root
    }
    for c in &m.connectors {
        let (a, b) = (find(&mut parent, &c.source.element), find(&mut parent, &c.target.element));
        parent.insert(a, b);
    }
    let f = p.model("Func").unwrap();
    let mut missing = 0;
    for c in &f.connectors {
        for a in p.allocated_to(&f.path_of(&c.source.element)) {
            for b in p.allocated_to(&f.path_of(&c.target.element)) {
                let (ra, rb) = (rep(&a.segments), rep(&b.segments));
                if a != b && find(&mut parent, &ra) != find(&mut parent, &rb) {
                    missing += 1;
                }
            }
        }
    }
    missing
}

#[test]
fn exchange_realization_matches_union_find() {
    let base = Fixture::load();
    let lines: Vec<&str> = base.files["models/physical.arch"].lines().filter(|l| l.trim_start().starts_with("connect")).collect();
    assert_eq!(lines.len(), 4);
    let mut flagged_total = 0;
    for mask in 0..16u32 {
        let mut f = base.clone();
        for (i, l) in lines.iter().enumerate() {
            if mask >> i & 1 == 1 {
                f.edit("models/physical.arch", &format!("{l}\n"), "");
            }
        }
        let p = f.project().project;
        let got = check(&p).iter().filter(|d| d.code == "M-EXCH-001").count();
        assert_eq!(got, expected_unrealized(&p), "mask {mask:04b}");
        flagged_total += got;
    }
    assert!(flagged_total > 0);
}

#[test]
fn fha_import_sets_fdal_and_creates_one_stub() {
    let f = Fixture::load();
    let mut without = f.clone();
    without.edit_manifest("  fha_results [\"safety/fha_results.fha\"]\n", "");
    let p = loaded(&without);
    let engage = func("Engage/Disengage Autopilot Surface Control");
    let fdal = |p: &Project| attr(p.element(&engage).unwrap().1, "fdal");
    assert_eq!(fdal(&p), None);

    let fha = parse_fha(&f.files["safety/fha_results.fha"], "fha_results.fha").value.unwrap();
    let imp = import_fha_results(&p, &fha);
    assert!(imp.diagnostics.is_empty(), "{:?}", imp.diagnostics);
    assert_eq!(fdal(&imp.project), Some(leanarch::model::AttrValue::Dal(Dal::A)));
    assert_eq!(imp.stubs.len(), 1);
    assert_eq!(imp.stubs[0].id, "SAF-REQ-001");
    assert!(imp.project.links.iter().any(|l| l.source == ArtifactRef::req("SAF-REQ-001")
        && l.link_type == LinkType::SatisfiedBy
        && l.target == ArtifactRef::element(engage.clone())));
    // The input project is untouched.
    assert_eq!(fdal(&p), None);

    let bad = parse_fha(&f.files["safety/fha_results.fha"].replace("fdal = A", "fdal = C"), "bad.fha").value.unwrap();
    let rejected = import_fha_results(&p, &bad);
    assert!(rejected.diagnostics.iter().any(|d| d.code == codes::FHA_MISMATCH && d.is_error()));
    assert!(rejected.stubs.is_empty());
    assert_eq!(fdal(&rejected.project), None);
}

#[test]
fn fha_mapping_table_is_configurable() {
    let mut f = Fixture::load();
    f.edit_manifest("  naming {", "  fdal_mapping {\n    catastrophic = B\n  }\n  naming {");
    f.edit("safety/fha_results.fha", "fdal = A", "fdal = B");
    let p = loaded(&f);
    let v = attr(p.element(&func("Engage/Disengage Autopilot Surface Control")).unwrap().1, "fdal");
    assert_eq!(v, Some(leanarch::model::AttrValue::Dal(Dal::B)));
}

#[test]
fn fpm_build_then_sync_is_idempotent() {
    let p = loaded(&Fixture::load());
    let m = p.model("Phys").unwrap();
    let skeleton = build_fpm(m);
    assert_eq!(skeleton.edges.len(), m.connectors.len());
    let (again, report) = sync_fpm(&skeleton, m).unwrap();
    assert!(report.is_empty(), "{}", report.render());
    assert_eq!(again, skeleton);
}

#[test]
fn sync_adds_mutated_structure_and_keeps_annotations() {
    let f = Fixture::load();
    let p = loaded(&f);
    let annotated = p.fpm_for("Phys").unwrap();
    let mut g = f.clone();
    support::sync_scenario(&mut g);
    let mutated = parse_model(&g.files["models/physical.arch"], "m.arch", &p.profiles);
    assert!(mutated.diagnostics.is_empty(), "{:?}", mutated.diagnostics);
    let mutated = mutated.value.unwrap();

    let (synced, report) = sync_fpm(annotated, &mutated).unwrap();
    assert_eq!(report.added_components, vec!["Backup_Switch"]);
    assert!(report.removed_components.is_empty());
    assert_eq!(report.added_ports, vec!["AP_Disconnect.DIS_In_06", "AP_Disc_Switch.DIS_Out_09"]);
    assert_eq!(report.removed_ports, vec!["AP_Disc_Switch.DIS_Out_01"]);
    assert_eq!(
        report.added_edges,
        vec!["AP_Disc_Switch.DIS_Out_09 -> AP_Disconnect.DIS_In_05", "Backup_Switch.DIS_Out_01 -> AP_Disconnect.DIS_In_06"]
    );
    assert_eq!(report.removed_edges, vec!["AP_Disc_Switch.DIS_Out_01 -> AP_Disconnect.DIS_In_05"]);
    assert_eq!(report.orphans.len(), 1);
    assert_eq!(report.orphans[0].component, vec!["AP_Disc_Switch"]);

    for name in ["FCC_01", "AP_Disconnect"] {
        let before = annotated.component(&[name.to_string()]).unwrap();
        let after = synced.component(&[name.to_string()]).unwrap();
        assert_eq!(before.basic_events, after.basic_events);
        assert_eq!(before.out_failures, after.out_failures);
    }
    assert_eq!(synced.top_events, annotated.top_events);

    let (_, second) = sync_fpm(&synced, &mutated).unwrap();
    assert!(second.is_empty(), "{}", second.render());
}

#[test]
fn fixture_cut_sets_and_single_point_variant() {
    let p = loaded(&Fixture::load());
    let r = compute_minimal_cut_sets(p.fpm_for("Phys").unwrap(), "InabilityToDisengage", None).unwrap();
    assert_eq!(r.min_order(), Some(2));
    assert_eq!(r.cut_sets.len(), 3);
    assert!(check_against_safety_requirements(&[r], &p).is_empty());

    let mut f = Fixture::load();
    support::single_channel(&mut f);
    let p = loaded(&f);
    let r = compute_minimal_cut_sets(p.fpm_for("Phys").unwrap(), "InabilityToDisengage", None).unwrap();
    assert_eq!(r.min_order(), Some(1));
    let ds = check_against_safety_requirements(&[r], &p);
    assert_eq!(ds.len(), 1, "{ds:?}");
    assert_eq!(ds[0].code, codes::SINGLE_POINT);
}

#[test]
fn custom_rules_from_profiles() {
    let mut f = Fixture::load();
    f.edit_manifest("\"profiles/physical.prof\"]", "\"profiles/physical.prof\", \"profiles/rules.prof\"]");
    f.files.insert(
        "profiles/rules.prof".into(),
        "profile Rules {\n  rules {\n    rule X-PN-001 on LRU check attribute_matches(part_number, \"^PN-\\\\d{5}$\") message \"part numbers look like PN-12345\"\n    rule X-EP-001 on A825Bus check endpoint_must_be(A825Port)\n  }\n}\n".into(),
    );
    assert!(check(&loaded(&f)).is_empty());

    let mut bad_pn = f.clone();
    bad_pn.edit("models/physical.arch", "PN-10002", "PN-12");
    let ds = check(&loaded(&bad_pn));
    assert_eq!(ds.iter().map(|d| d.code.as_str()).collect::<Vec<_>>(), vec!["X-PN-001"]);
    assert!(ds[0].message.contains("PN-12345"));

    let mut rewired = f.clone();
    rewired.edit("models/physical.arch", "connect FCC_01.A825_01 -> AP_Disconnect.A825_02", "connect FCC_01.A825_01 -> AP_Disconnect.DIS_In_04");
    let codes: BTreeSet<String> = check(&loaded(&rewired)).into_iter().filter(|d| d.is_error()).map(|d| d.code).collect();
    assert!(codes.contains("X-EP-001") && codes.contains("M-PORT-001"), "{codes:?}");

    let mut unknown = f.clone();
    unknown.files.insert("profiles/rules.prof".into(), "profile Rules {\n  rules {\n    rule X-UK-001 on NoSuchThing check attribute_required(description)\n  }\n}\n".into());
    let p = unknown.project().project;
    let (reg, diags) = RuleRegistry::for_project(&p);
    assert_eq!(diags.len(), 1);
    assert_eq!(diags[0].code, codes::CUSTOM_RULE);
    assert!(reg.get("X-UK-001").is_none());
}

#[test]
fn coverage_counts_levels() {
    let p = loaded(&Fixture::load());
    let r = leanarch::requirements::coverage_report(&p);
    assert!(r.is_complete());
    let scope = leanarch::requirements::coverage_scope(&p);
    assert_eq!(scope.iter().filter(|e| e.model == "Func").count(), 4);
    assert!(scope.contains(&phys(&["AP_Disconnect", "AP_Disconnect_SW"])));
    assert!(scope.contains(&phys(&["FCC_01"])));
    assert!(!scope.contains(&phys(&["AP_Disconnect"])));
    assert!(p.models_of(ModelKind::Physical).count() == 1);

    let mut f = Fixture::load();
    f.edit("requirements/links.req", "link SYS-REQ-003 satisfied_by \"Func.Autopilot Functions.Provide Pilot Disconnect Command\"\n", "");
    let r = leanarch::requirements::coverage_report(&loaded(&f));
    assert_eq!(r.uncovered, vec![func("Provide Pilot Disconnect Command")]);
    assert_eq!(r.dangling, vec!["SYS-REQ-003".to_string()]);
}
