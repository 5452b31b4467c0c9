#![allow(dead_code)]

pub mod gen;

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use leanarch::project::{load_from_source, MANIFEST_NAME};
use leanarch::{Execution, ProjectLoad};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/autopilot")
}

/// The autopilot fixture held in memory so tests can edit it.
#[derive(Clone)]
pub struct Fixture {
    pub manifest: String,
    pub files: HashMap<String, String>,
}

fn read_tree(root: &Path, dir: &Path, out: &mut HashMap<String, String>) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            read_tree(root, &path, out);
        } else {
            let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
            out.insert(rel, fs::read_to_string(&path).unwrap());
        }
    }
}

impl Fixture {
    pub fn load() -> Self {
        let root = fixture_dir();
        let mut files = HashMap::new();
        read_tree(&root, &root, &mut files);
        let manifest = files.remove(MANIFEST_NAME).unwrap();
        Self { manifest, files }
    }

    /// Replace one exact occurrence of `from` in `file`.
    pub fn edit(&mut self, file: &str, from: &str, to: &str) -> &mut Self {
        let text = self.files.get_mut(file).unwrap_or_else(|| panic!("no fixture file {file}"));
        assert_eq!(text.matches(from).count(), 1, "`{from}` must occur once in {file}");
        *text = text.replacen(from, to, 1);
        self
    }

    pub fn edit_manifest(&mut self, from: &str, to: &str) -> &mut Self {
        assert_eq!(self.manifest.matches(from).count(), 1, "`{from}` must occur once in the manifest");
        self.manifest = self.manifest.replacen(from, to, 1);
        self
    }

    pub fn load_with(&self, exec: Execution) -> ProjectLoad {
        load_from_source(&self.manifest, MANIFEST_NAME, &self.files, exec)
    }

    pub fn project(&self) -> ProjectLoad {
        self.load_with(Execution::default())
    }

    pub fn write_to(&self, dir: &Path) {
        fs::write(dir.join(MANIFEST_NAME), &self.manifest).unwrap();
        for (rel, text) in &self.files {
            let p = dir.join(rel);
            fs::create_dir_all(p.parent().unwrap()).unwrap();
            fs::write(p, text).unwrap();
        }
    }
}

/// A single documented edit of the fixture and the one rule it must trip.
pub struct Mutation {
    pub name: &'static str,
    pub file: &'static str,
    pub from: &'static str,
    pub to: &'static str,
    pub expect: &'static str,
}

impl Mutation {
    pub fn apply(&self) -> Fixture {
        let mut f = Fixture::load();
        f.edit(self.file, self.from, self.to);
        f
    }
}

pub const MUTATIONS: [Mutation; 6] = [
    Mutation {
        name: "remove requirement link",
        file: "requirements/links.req",
        from: "link SYS-REQ-004 satisfied_by \"Func.Autopilot Functions.Actuate Control Surfaces\"\n",
        to: "",
        expect: "P-TRACE-001",
    },
    Mutation {
        name: "unset required attribute",
        file: "models/functional.arch",
        from: "      description = \"Give the pilot a direct means to disengage the autopilot\"\n",
        to: "",
        expect: "P-ATTR-001",
    },
    Mutation {
        name: "rewire discrete port to A825 port",
        file: "models/physical.arch",
        from: "connect FCC_01.DIS_Out_01 -> AP_Disconnect.DIS_In_04",
        to: "connect FCC_01.DIS_Out_01 -> AP_Disconnect.A825_02",
        expect: "M-PORT-001",
    },
    Mutation {
        name: "remove allocation",
        file: "requirements/links.req",
        from: "link \"Func.Autopilot Functions.Actuate Control Surfaces\" allocated_to Phys.Elevator_Servo\n",
        to: "",
        expect: "P-ALLOC-001",
    },
    Mutation {
        name: "remove connector realizing an exchange",
        file: "models/physical.arch",
        from: "  connect AP_Disc_Switch.DIS_Out_01 -> AP_Disconnect.DIS_In_05 : DiscreteLink\n",
        to: "",
        expect: "M-EXCH-001",
    },
    Mutation {
        name: "remove assumption justification",
        file: "requirements/system.req",
        from: "  justification = \"Established pilot reaction time for test flights with a trained crew.\"\n",
        to: "",
        expect: "R-ASM-001",
    },
];

/// Single-channel disengage logic: either relay pair or the FCC discrete
/// alone defeats disengagement.
pub fn single_channel(f: &mut Fixture) -> &mut Fixture {
    f.edit(
        "safety/physical.fpm",
        "AND(in_failure DIS_In_04.omission, in_failure DIS_In_05.omission)",
        "in_failure DIS_In_04.omission",
    )
}

/// Adds a switch with a new connection, a new input port and renames one
/// existing port, all in the physical model.
pub fn sync_scenario(f: &mut Fixture) -> &mut Fixture {
    let file = "models/physical.arch";
    f.edit(file, "    port A825_02 inout", "    port DIS_In_06 in : DiscretePort\n    port A825_02 inout")
        .edit(file, "control stick\"\n    port DIS_Out_01", "control stick\"\n    port DIS_Out_09")
        .edit(
            file,
            "  component Elevator_Servo",
            "  component Backup_Switch : Sensor {\n    port DIS_Out_01 out : DiscretePort\n  }\n  component Elevator_Servo",
        )
        .edit(file, "connect AP_Disc_Switch.DIS_Out_01", "connect AP_Disc_Switch.DIS_Out_09")
        .edit(
            file,
            "Elevator_Servo.DIS_In_01 : DiscreteLink\n",
            "Elevator_Servo.DIS_In_01 : DiscreteLink\n  connect Backup_Switch.DIS_Out_01 -> AP_Disconnect.DIS_In_06 : DiscreteLink\n",
        )
}
