//! Fixture -> snapshot -> GLUE2 XML -> client records, checked end to end.

use grespipe_core::client::{format_arcinfo, parse_execution_targets};
use grespipe_core::infoprovider::{build_computing_service, render_glue2_xml, SiteConfig};
use grespipe_core::lrms::{collect_cluster_info, read_gres_info, ClusterFixture, NodeClass};
use proptest::prelude::*;
use quick_xml::events::Event;
use quick_xml::Reader;

const KEBNEKAISE: &str = include_str!("../../../samples/kebnekaise.fixture");

fn site() -> SiteConfig {
    SiteConfig::parse("admin_domain=HPC2N\nservice_id=urn:ogf:ComputingService:test\nmanager_name=slurm\n").unwrap()
}

fn pipeline(fixture: &ClusterFixture) -> String {
    let snapshot = collect_cluster_info(fixture).unwrap();
    render_glue2_xml(&build_computing_service(&snapshot, &site()).unwrap())
}

/// Well-formedness and Resource texts via quick-xml, independent of the
/// client's parser.
fn resources_via_quick_xml(xml: &str) -> Vec<String> {
    let mut reader = Reader::from_str(xml);
    let mut stack: Vec<String> = Vec::new();
    let mut out = Vec::new();
    loop {
        match reader.read_event().expect("well-formed XML") {
            Event::Start(e) => {
                let name = String::from_utf8(e.name().as_ref().to_vec()).unwrap();
                if name == "Resource" && stack.last().map(String::as_str) == Some("GeneralResources") {
                    out.push(String::new());
                }
                stack.push(name);
            }
            Event::End(e) => {
                assert_eq!(stack.pop().as_deref().map(str::as_bytes), Some(e.name().as_ref()));
            }
            Event::Text(t) if stack.last().map(String::as_str) == Some("Resource") => {
                out.last_mut().unwrap().push_str(&t.unescape().unwrap());
            }
            Event::Eof => break,
            _ => {}
        }
    }
    assert!(stack.is_empty(), "unclosed elements {stack:?}");
    out
}

#[test]
fn kebnekaise_end_to_end() {
    let fixture = ClusterFixture::parse(KEBNEKAISE, "kebnekaise").unwrap();
    let xml = pipeline(&fixture);
    let expected = read_gres_info(&fixture).unwrap();
    assert_eq!(expected.len(), 5);
    assert_eq!(resources_via_quick_xml(&xml), expected);
    let records = parse_execution_targets(&xml).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].manager.general_resources, expected);
    assert_eq!(records[0].admin_domain, "HPC2N");
    assert_eq!(records[0].service_id, "urn:ogf:ComputingService:test");
    assert_eq!(records[0].manager.manager_name, "slurm");

    let report = format_arcinfo(&records);
    let block: Vec<&str> = report
        .lines()
        .skip_while(|l| l.trim() != "General resources:")
        .take(6)
        .map(str::trim)
        .collect();
    assert_eq!(block[0], "General resources:");
    assert_eq!(&block[1..], expected.as_slice());
}

#[test]
fn escapable_characters_survive() {
    let fixture = ClusterFixture::new(
        "c",
        vec![NodeClass {
            partition: "p".into(),
            node_count: 1,
            gres_line: "a&b:<x>:2,q\"'>:1".into(),
        }],
    );
    let xml = pipeline(&fixture);
    assert!(xml.contains("a&amp;b:&lt;x&gt;:2"));
    let records = parse_execution_targets(&xml).unwrap();
    assert_eq!(records[0].manager.general_resources, vec!["a&b:<x>:2,q\"'>:1"]);
}

fn token() -> impl Strategy<Value = String> {
    "[A-Za-z0-9_&<>'\"()-]{1,6}"
}

// Leading non-digit, so a name:subtype pair is never read as name:count.
fn subtype() -> impl Strategy<Value = String> {
    "[A-Za-z_&<>'\"()-][A-Za-z0-9_&<>'\"()-]{0,5}"
}

fn count() -> impl Strategy<Value = String> {
    "[0-9]{1,3}[KMG]?"
}

fn gres_segment() -> impl Strategy<Value = String> {
    (token(), prop::option::of(subtype()), prop::option::of(count())).prop_map(|(name, sub, count)| {
        [Some(name), sub, count].into_iter().flatten().collect::<Vec<_>>().join(":")
    })
}

fn node_class(null_weight: u32) -> impl Strategy<Value = NodeClass> {
    let gres = prop_oneof![
        null_weight => Just("(null)".to_owned()),
        100 - null_weight => prop::collection::vec(gres_segment(), 1..4).prop_map(|v| v.join(",")),
    ];
    ("[a-z]{1,8}", 1u32..64, gres).prop_map(|(partition, node_count, gres_line)| NodeClass {
        partition,
        node_count,
        gres_line,
    })
}

fn fixture() -> impl Strategy<Value = ClusterFixture> {
    (0u32..=100)
        .prop_flat_map(|w| prop::collection::vec(node_class(w), 1..10))
        .prop_map(|classes| ClusterFixture::new("random", classes))
}

/// Inserts an unknown element after the `n`th tag inside the root.
fn inject(xml: &str, n: usize) -> String {
    let body_start = xml.find("?>").map_or(0, |i| i + 2);
    let root_end = xml.rfind("</").unwrap();
    let cuts: Vec<usize> = xml[body_start..root_end]
        .match_indices('>')
        .map(|(i, _)| body_start + i + 1)
        .collect();
    let at = cuts[n % cuts.len()];
    format!("{}<Extra kind=\"x\"><Resource>bogus</Resource>noise</Extra>{}", &xml[..at], &xml[at..])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn client_recovers_lrms_output(fixture in fixture(), n in any::<usize>()) {
        prop_assume!(fixture.validate().is_ok());
        let expected = read_gres_info(&fixture).unwrap();
        let xml = pipeline(&fixture);

        prop_assert_eq!(&resources_via_quick_xml(&xml), &expected);
        let records = parse_execution_targets(&xml).unwrap();
        prop_assert_eq!(&records[0].manager.general_resources, &expected);

        let noisy = inject(&xml, n);
        let records = parse_execution_targets(&noisy).unwrap();
        prop_assert_eq!(&records[0].manager.general_resources, &expected);

        let report = format_arcinfo(&records);
        prop_assert!(!xml.contains("(null)"));
        prop_assert!(!report.contains("(null)"));
        let block = report.lines().skip_while(|l| !l.contains("General resources:")).take_while(|l| !l.is_empty()).count();
        prop_assert_eq!(block, if expected.is_empty() { 0 } else { expected.len() + 1 });
    }
}

#[test]
fn fixture_file_round_trip() {
    let fixture = ClusterFixture::parse(KEBNEKAISE, "x").unwrap();
    assert_eq!(fixture.cluster_name, "kebnekaise");
    assert_eq!(fixture.node_classes.len(), 6);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.fixture");
    std::fs::write(&path, KEBNEKAISE).unwrap();
    assert_eq!(ClusterFixture::load(&path).unwrap(), fixture);
}
