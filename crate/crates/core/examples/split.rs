//! Splits a two-bubble metric at the neck and compares the spectrum of the
//! pieces with the original one.

use extremal::conformal::{bubble_family, bubble_mesh, BubbleSpec};
use extremal::splitting::compare_split;

fn main() -> extremal::Result<()> {
    for eps in [0.1, 0.05, 0.02] {
        let spec = BubbleSpec::symmetric(2, eps)?;
        let mesh = bubble_mesh(5, &spec)?;
        let density = bubble_family(&mesh, &spec)?;
        let report = compare_split(&mesh, &density, spec.centers()[0], 0.5 * spec.cap_radius(), 6)?;
        println!("eps {eps}: max mismatch {:.4}", report.max_mismatch());
        for (i, (orig, (merged, piece))) in report.original.iter().zip(&report.merged).enumerate() {
            println!("  {i}: original {orig:>10.4}  merged {merged:>10.4} from {piece:?}");
        }
    }
    Ok(())
}
