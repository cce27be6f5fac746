use serde::Serialize;

use super::{NodeKind, OutputRef, PipelineSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditViolation {
    pub output: OutputRef,
    /// `input:<name>`, the node ids along the way, then `outputs`.
    pub path: Vec<String>,
    pub reason: String,
}

/// Every input-to-output flow in a spec, and the ones that export real data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub passed: bool,
    pub flows: Vec<Vec<String>>,
    pub violations: Vec<AuditViolation>,
}

/// Checks that only synthetic, metric and report artifacts leave the run.
/// A load or preprocess artifact in `outputs` is raw data (or a direct
/// transform of it) and counts as a leak along every path that reaches it.
pub fn data_flow_audit(spec: &PipelineSpec) -> AuditReport {
    let dag = spec.graph();
    let mut flows = Vec::new();
    let mut violations = Vec::new();
    for out in &spec.outputs {
        let Some(target) = spec.node_index(&out.node) else { continue };
        let kind = spec.nodes[target].kind();
        for (src, node) in spec.nodes.iter().enumerate() {
            let super::NodeParams::Load(load) = &node.params else { continue };
            for path in dag.paths(src, target) {
                let mut named = vec![format!("input:{}", load.input)];
                named.extend(path.iter().map(|&i| spec.nodes[i].id.clone()));
                named.push("outputs".to_string());
                if kind.yields_real_data() {
                    violations.push(AuditViolation {
                        output: out.clone(),
                        path: named.clone(),
                        reason: format!(
                            "`{}` is a {} artifact derived only from real data",
                            out.node,
                            if kind == NodeKind::Load { "raw input" } else { "preprocessed" }
                        ),
                    });
                }
                flows.push(named);
            }
        }
    }
    AuditReport { passed: violations.is_empty(), flows, violations }
}
