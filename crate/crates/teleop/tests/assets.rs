use std::path::{Path, PathBuf};

use proptest::prelude::*;

use samadyn_core::control::ControllerKind;
use samadyn_core::model::RobotParams;
use samadyn_teleop::kinematics_document;
use samadyn_teleop::protocol::CommandMessage;

fn docs(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs").join(name)
}

/// `docs/kinematics.json` is generated from the shipped parameters; set
/// `SAMADYN_BLESS=1` to regenerate it after changing them.
#[test]
fn kinematics_asset_matches_parameters() {
    let doc = serde_json::to_string_pretty(&kinematics_document(&RobotParams::default_params())).unwrap() + "\n";
    let path = docs("kinematics.json");
    if std::env::var_os("SAMADYN_BLESS").is_some() {
        std::fs::write(&path, &doc).unwrap();
    }
    let on_disk = std::fs::read_to_string(&path).unwrap();
    assert!(on_disk == doc, "docs/kinematics.json is stale; rerun with SAMADYN_BLESS=1");
}

#[test]
fn protocol_doc_names_every_command() {
    let text = std::fs::read_to_string(docs("protocol.md")).unwrap();
    for name in [
        "altitude_delta",
        "yaw_rate",
        "ee_target_left",
        "ee_target_right",
        "head_orientation",
        "hand_closure_left",
        "hand_closure_right",
        "controller_select",
    ] {
        assert!(text.contains(name), "{name} undocumented");
    }
}

fn schema() -> jsonschema::Validator {
    let text = std::fs::read_to_string(docs("command.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn arb_command() -> impl Strategy<Value = CommandMessage> {
    let scalar = -2.0..2.0f64;
    let point = proptest::array::uniform3(-0.57..0.57f64);
    prop_oneof![
        scalar.clone().prop_map(CommandMessage::AltitudeDelta),
        scalar.clone().prop_map(CommandMessage::YawRate),
        point.clone().prop_map(CommandMessage::EeTargetLeft),
        point.prop_map(CommandMessage::EeTargetRight),
        proptest::array::uniform3(-4.0..4.0f64).prop_map(CommandMessage::HeadOrientation),
        scalar.clone().prop_map(CommandMessage::HandClosureLeft),
        scalar.prop_map(CommandMessage::HandClosureRight),
        prop_oneof![Just(ControllerKind::Proposed), Just(ControllerKind::Baseline)].prop_map(CommandMessage::ControllerSelect),
    ]
}

proptest! {
    #[test]
    fn schema_agrees_with_server_validation(msg in arb_command()) {
        let json = serde_json::to_value(&msg).unwrap();
        prop_assert_eq!(schema().is_valid(&json), msg.validate().is_ok(), "{}", json);
    }

    #[test]
    fn far_hand_targets_fail_server_side(x in proptest::array::uniform3(-1.0..1.0f64)) {
        let msg = CommandMessage::EeTargetLeft(x);
        let json = serde_json::to_value(&msg).unwrap();
        prop_assert!(schema().is_valid(&json));
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert_eq!(msg.validate().is_ok(), norm <= 1.0);
    }
}

#[test]
fn schema_rejects_malformed_frames() {
    let v = schema();
    for bad in [
        r#"{"type":"warp","value":1}"#,
        r#"{"type":"yaw_rate"}"#,
        r#"{"type":"yaw_rate","value":0.1,"extra":1}"#,
        r#"{"type":"ee_target_left","value":[0.1,0.2]}"#,
        r#"{"type":"controller_select","value":"pid"}"#,
    ] {
        let json: serde_json::Value = serde_json::from_str(bad).unwrap();
        assert!(!v.is_valid(&json), "{bad}");
        assert!(CommandMessage::parse(bad).is_err(), "{bad}");
    }
}
