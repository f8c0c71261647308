//! JSON report documents. Field order in these structs is the key order in
//! the output.

use serde::Serialize;
use twoconn_core::analysis::{Certification, DetectionResult, Mismatch};
use twoconn_core::simulator::{
    round_scale, FaultEvent, FaultField, FaultValue, FieldFault, RunReport, Trigger,
};
use twoconn_core::Graph;

#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub graph: GraphSummary,
    pub run: RunSummary,
    pub faults: Vec<FaultRecord>,
    pub detection: Option<DetectionRecord>,
    pub certification: CertificationRecord,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphSummary {
    pub source: String,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub delta: usize,
}

impl GraphSummary {
    pub fn new(source: &str, g: &Graph) -> GraphSummary {
        GraphSummary {
            source: source.to_string(),
            n: g.n(),
            m: g.m(),
            d: g.diameter(),
            delta: g.max_degree(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Seeds {
    pub scheduler: Option<u64>,
    pub init: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scheduler: String,
    pub seeds: Seeds,
    pub max_rounds: u64,
    pub rounds: u64,
    pub steps: u64,
    pub stabilization_round: Option<u64>,
    /// `stabilization_round / (d·n·Δ)`.
    pub round_ratio: Option<f64>,
    pub stabilized: bool,
    pub closure_rounds: u64,
    pub closure_changes: u64,
    pub max_register_bits: usize,
    pub register_bit_budget: usize,
    pub max_path_len: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldRecord {
    pub node: u32,
    pub field: &'static str,
    pub value: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FaultRecord {
    pub trigger: String,
    pub step: u64,
    pub round: u64,
    pub after_stabilization: bool,
    pub fields: Vec<FieldRecord>,
    pub recovered: bool,
    pub recovery_rounds: Option<u64>,
    pub restored_identical: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Component {
    pub label: String,
    pub nodes: Vec<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectionRecord {
    pub bridges: Vec<[u32; 2]>,
    pub articulation_points: Vec<u32>,
    pub components: Vec<Component>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificationRecord {
    #[serde(rename = "match")]
    pub matched: bool,
    pub mismatches: Vec<String>,
}

fn field_name(f: FaultField) -> &'static str {
    match f {
        FaultField::Path => "path",
        FaultField::Count => "count",
        FaultField::Bcc => "bcc",
        FaultField::Locals => "locals",
    }
}

impl From<&FieldFault> for FieldRecord {
    fn from(f: &FieldFault) -> FieldRecord {
        FieldRecord {
            node: f.node.0,
            field: field_name(f.field),
            value: f.value.as_ref().map(|v| match v {
                FaultValue::Path(p) => p.to_string(),
                FaultValue::Count(c) => c.to_string(),
            }),
        }
    }
}

impl From<&FaultEvent> for FaultRecord {
    fn from(e: &FaultEvent) -> FaultRecord {
        FaultRecord {
            trigger: match e.trigger {
                Trigger::AtStep(s) => format!("step {s}"),
                Trigger::AfterStabilization => "post-stabilization".into(),
            },
            step: e.step,
            round: e.round,
            after_stabilization: e.after_stabilization,
            fields: e.applied.iter().map(FieldRecord::from).collect(),
            recovered: e.recovered,
            recovery_rounds: e.recovery_rounds,
            restored_identical: e.restored_identical,
        }
    }
}

impl From<&DetectionResult> for DetectionRecord {
    fn from(d: &DetectionResult) -> DetectionRecord {
        let mut components: Vec<Component> = d
            .partition()
            .into_iter()
            .map(|nodes| Component {
                label: d.component_of[nodes.first().expect("non-empty").index()].to_string(),
                nodes: nodes.iter().map(|v| v.0).collect(),
            })
            .collect();
        components.sort_by_key(|c| c.nodes[0]);
        DetectionRecord {
            bridges: d.bridges.iter().map(|e| [e.0 .0, e.1 .0]).collect(),
            articulation_points: d.articulation_points.iter().map(|v| v.0).collect(),
            components,
        }
    }
}

pub fn describe_mismatch(m: &Mismatch) -> String {
    match m {
        Mismatch::MissingBridge(e) => format!("missing bridge {e}"),
        Mismatch::SpuriousBridge(e) => format!("spurious bridge {e}"),
        Mismatch::MissingArticulationPoint(v) => format!("missing articulation point {v}"),
        Mismatch::SpuriousArticulationPoint(v) => format!("spurious articulation point {v}"),
        Mismatch::SplitComponent { a, b } => {
            format!("nodes {a} and {b} share a component but not a label")
        }
        Mismatch::MergedComponents { a, b } => {
            format!("nodes {a} and {b} share a label across components")
        }
        Mismatch::WrongLabel { node } => format!("node {node} carries the wrong component label"),
    }
}

impl CertificationRecord {
    pub fn new(c: Option<&Certification>, stabilized: bool) -> CertificationRecord {
        match c {
            Some(c) => CertificationRecord {
                matched: c.matched,
                mismatches: c.mismatches.iter().map(describe_mismatch).collect(),
            },
            None => CertificationRecord {
                matched: false,
                mismatches: vec![if stabilized {
                    "no detection result".into()
                } else {
                    "run did not stabilize".into()
                }],
            },
        }
    }
}

impl ReportDocument {
    pub fn new(
        source: &str,
        g: &Graph,
        init_seed: u64,
        max_rounds: u64,
        r: &RunReport,
    ) -> ReportDocument {
        ReportDocument {
            graph: GraphSummary::new(source, g),
            run: RunSummary {
                scheduler: r.scheduler.name().to_string(),
                seeds: Seeds {
                    scheduler: r.scheduler.seed(),
                    init: init_seed,
                },
                max_rounds,
                rounds: r.rounds,
                steps: r.total_steps,
                stabilization_round: r.stabilization_round,
                round_ratio: r
                    .stabilization_round
                    .map(|s| s as f64 / round_scale(g) as f64),
                stabilized: r.stabilized,
                closure_rounds: r.closure_rounds,
                closure_changes: r.closure_changes,
                max_register_bits: r.space.max_register_bits,
                register_bit_budget: r.space.register_bit_budget,
                max_path_len: r.space.max_path_len,
            },
            faults: r.fault_events.iter().map(FaultRecord::from).collect(),
            detection: r.detection.as_ref().map(DetectionRecord::from),
            certification: CertificationRecord::new(r.certification.as_ref(), r.stabilized),
        }
    }

    /// 0 when stabilized and certified, 1 on non-convergence, 2 on a
    /// certification mismatch.
    pub fn exit_code(&self) -> u8 {
        exit_code(self.run.stabilized, self.certification.matched)
    }
}

pub fn exit_code(stabilized: bool, certified: bool) -> u8 {
    match (stabilized, certified) {
        (false, _) => 1,
        (true, false) => 2,
        (true, true) => 0,
    }
}
