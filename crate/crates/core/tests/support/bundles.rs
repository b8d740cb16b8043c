//! Random app resource trees and rule sets for the filter algebra checks.

use confcheck::format::DataFormat;
use confcheck::rulegen::{DetectionRule, Direction, RuleKind};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const TAGS: [&str; 5] = ["selector", "item", "layer-list", "androidx.appcompat.widget.Toolbar", "shape"];
const ATTRS: [&str; 4] = ["color", "gravity", "left", "state_activated"];
const VALUES: [&str; 8] = [
    "?android:attr/textColorSecondary",
    "#ff0000",
    "@android:color/black",
    "true",
    "12dp",
    "0.5",
    "center",
    "?attr/colorAccent",
];
const TYPES: [&str; 3] = ["color", "drawable", "layout"];

pub fn random_manifest(rng: &mut ChaCha8Rng) -> String {
    if rng.gen_bool(0.1) {
        return "<manifest xmlns:android=\"http://schemas.android.com/apk/res/android\" />\n".to_string();
    }
    format!(
        "<manifest xmlns:android=\"http://schemas.android.com/apk/res/android\">\n  <uses-sdk android:minSdkVersion=\"{}\" />\n</manifest>\n",
        rng.gen_range(15..=26)
    )
}

fn element(rng: &mut ChaCha8Rng, depth: u32, root: bool, out: &mut String) {
    let tag = TAGS.choose(rng).unwrap();
    out.push('<');
    out.push_str(tag);
    if root {
        out.push_str(" xmlns:android=\"http://schemas.android.com/apk/res/android\" xmlns:app=\"http://schemas.android.com/apk/res-auto\"");
    }
    for _ in 0..rng.gen_range(0..=3) {
        let ns = if rng.gen_bool(0.8) { "android" } else { "app" };
        // attributes on their own lines so warnings get distinct line numbers
        out.push_str(&format!("\n    {ns}:{}=\"{}\"", ATTRS.choose(rng).unwrap(), VALUES.choose(rng).unwrap()));
    }
    if depth == 0 || rng.gen_bool(0.4) {
        out.push_str(" />\n");
        return;
    }
    out.push_str(">\n");
    for _ in 0..rng.gen_range(1..=3) {
        element(rng, depth - 1, false, out);
    }
    out.push_str(&format!("</{tag}>\n"));
}

/// Resource files as (path, text); some logical names get `-vK` siblings.
pub fn random_files(rng: &mut ChaCha8Rng) -> Vec<(String, String)> {
    let mut files = Vec::new();
    for n in 0..rng.gen_range(0..=4) {
        let ty = TYPES.choose(rng).unwrap();
        let mut quals = vec![0u32];
        for _ in 0..rng.gen_range(0..=2) {
            quals.push(rng.gen_range(16..=26));
        }
        quals.sort_unstable();
        quals.dedup();
        for q in quals {
            let dir = if q == 0 { ty.to_string() } else { format!("{ty}-v{q}") };
            let mut text = "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n".to_string();
            element(rng, 2, true, &mut text);
            files.push((format!("res/{dir}/res{n}.xml"), text));
        }
    }
    files
}

pub fn random_rules(rng: &mut ChaCha8Rng) -> Vec<DetectionRule> {
    (0..rng.gen_range(1..=6))
        .map(|_| {
            let l1 = rng.gen_range(16..=25);
            let levels = [l1, l1 + 1];
            let attribute = format!("android:{}", ATTRS.choose(rng).unwrap());
            let tag = TAGS.choose(rng).unwrap().to_string();
            if rng.gen_bool(0.5) {
                DetectionRule {
                    kind: RuleKind::LoadingChange,
                    attribute,
                    tag,
                    format: None,
                    levels,
                    direction: Some(*[Direction::Introduced, Direction::Removed].choose(rng).unwrap()),
                }
            } else {
                DetectionRule {
                    kind: RuleKind::FormatChange,
                    attribute,
                    tag,
                    format: Some(*DataFormat::ALL.choose(rng).unwrap()),
                    levels,
                    direction: None,
                }
            }
        })
        .collect()
}
