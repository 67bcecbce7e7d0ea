use std::time::Instant;

use ominv::suite::instances;
use ominv::synthesis::{check_certificate, decide, Budget, NoReason, Verdict};

fn main() {
    let only: Option<String> = std::env::args().nth(1);
    for inst in instances() {
        if only.as_deref().map_or(false, |o| o != inst.name) {
            continue;
        }
        let t = Instant::now();
        let v = decide(&inst.problem, &Budget::default()).unwrap();
        let kind = match &v {
            Verdict::InvariantFound(c) => {
                let r = check_certificate(c, &inst.problem, 1000, 1).unwrap();
                format!("invariant t0={} prefix={} check={} acc={} und={} rej={} {:?}", c.t0, c.prefix.len(), r.passed(), r.accepted, r.undetermined, r.rejected, r.failures.first())
            }
            Verdict::NoInvariant(NoReason::OrbitHitsF { n, .. }) => format!("hits {}", n),
            Verdict::NoInvariant(NoReason::RayPersistsInF(e)) => format!("ray {:?} thr {:?}", e.point, e.threshold),
            Verdict::Unknown(r) => format!("unknown {:?}", r),
        };
        println!("{:24} {:?} -> {} ({:.2}s)", inst.name, inst.expect, kind, t.elapsed().as_secs_f64());
    }
}
