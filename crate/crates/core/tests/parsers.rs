use std::path::PathBuf;

use lendaudit_core::apk::{extract_bundle, open_archive, MANIFEST_ENTRY};
use lendaudit_core::axml::decode_axml;
use lendaudit_core::dex::{extract_invocations, parse_dex, uses_reflection};
use lendaudit_core::manifest::extract_manifest;
use lendaudit_core::pipeline::read_manifest;
use proptest::prelude::*;

fn apk(name: &str) -> Vec<u8> {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/apks").join(format!("{name}.apk"));
    std::fs::read(p).unwrap()
}

#[test]
fn multidex_bundle_keeps_suffix_order() {
    let bytes = apk("com.fx.mkopohub");
    let archive = open_archive(&bytes).unwrap();
    let bundle = extract_bundle(&archive).unwrap();
    let names: Vec<&str> = bundle.dex_entries.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["classes.dex", "classes2.dex"]);
    let dex: Vec<_> = bundle.dex_entries.iter().map(|(_, b)| parse_dex(b).unwrap()).collect();
    let calls = extract_invocations(&dex).unwrap();
    assert!(calls.iter().any(|i| i.callee.class_descriptor == "Lretrofit2/Retrofit;"));
}

#[test]
fn alias_launcher_resolves_to_target() {
    let m = read_manifest(&apk("com.fx.pinoyloan")).unwrap();
    assert!(m.launcher_activities.contains("com.fx.pinoyloan.Launcher"));
    assert!(m.launcher_classes().contains("com.fx.pinoyloan.MainActivity"));
}

#[test]
fn reflection_flag_follows_bytecode() {
    for (name, expected) in [("com.fx.lendhub", true), ("com.fx.pinoyloan", false)] {
        let bytes = apk(name);
        let archive = open_archive(&bytes).unwrap();
        let bundle = extract_bundle(&archive).unwrap();
        let dex: Vec<_> = bundle.dex_entries.iter().map(|(_, b)| parse_dex(b).unwrap()).collect();
        assert_eq!(uses_reflection(&dex), expected, "{name}");
    }
}

#[test]
fn manifest_entry_decodes_directly() {
    let bytes = apk("com.fx.sikapay");
    let archive = open_archive(&bytes).unwrap();
    let doc = decode_axml(&archive.read_entry(MANIFEST_ENTRY).unwrap()).unwrap();
    let m = extract_manifest(&doc).unwrap();
    assert_eq!(m.package_id, "com.fx.sikapay");
    assert_eq!((m.min_sdk, m.target_sdk), (30, 36));
}

proptest! {
    #[test]
    fn parsers_reject_garbage_without_panicking(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
        let _ = open_archive(&bytes);
        let _ = decode_axml(&bytes);
        let _ = parse_dex(&bytes);
    }

    #[test]
    fn truncated_apks_fail_cleanly(cut in 0usize..4096) {
        let bytes = apk("com.fx.naijacash");
        let cut = cut.min(bytes.len() - 1);
        prop_assert!(read_manifest(&bytes[..cut]).is_err());
    }

    #[test]
    fn corrupted_dex_fails_cleanly(at in 0usize..2048, flip in 1u8..=255) {
        let bytes = apk("com.fx.quickbob");
        let archive = open_archive(&bytes).unwrap();
        let mut dex = extract_bundle(&archive).unwrap().dex_entries.remove(0).1;
        let at = at % dex.len();
        dex[at] ^= flip;
        if let Ok(d) = parse_dex(&dex) {
            let _ = d.invocations();
        }
    }
}
