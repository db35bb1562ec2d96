use shiftsign_lab::config::RawConfig;
use shiftsign_lab::csv::{Cell, CsvReport};
use shiftsign_lab::scenarios::{ScenarioConfig, ScenarioId, ShiftScanConfig};
use shiftsign_lab::LabError;
use shiftsign::sign_engine::Depth;

#[test]
fn parses_flat_key_values() {
    let raw = RawConfig::parse("# comment\n\n dim = 32 \nk=4\ndepths = exact, 2 ,6\n").unwrap();
    let loaded = ScenarioConfig::load(ScenarioId::ShiftScan, &raw).unwrap();
    let ScenarioConfig::ShiftScan(c) = loaded.config else {
        panic!("wrong scenario")
    };
    assert_eq!(c.dim, 32);
    assert_eq!(c.k, 4);
    assert_eq!(c.depths, vec![Depth::Exact, Depth::Steps(2), Depth::Steps(6)]);
    assert_eq!(c.half_gap, ShiftScanConfig::default().half_gap);
    assert_eq!(loaded.out, ScenarioId::ShiftScan.default_out());
}

#[test]
fn rejects_malformed_and_unknown_input() {
    assert!(matches!(RawConfig::parse("dim 32"), Err(LabError::Parse { line: 1, .. })));
    assert!(matches!(RawConfig::parse("a = 1\na = 2"), Err(LabError::Parse { line: 2, .. })));
    let raw = RawConfig::parse("dimm = 32").unwrap();
    assert!(matches!(
        ScenarioConfig::load(ScenarioId::ShiftScan, &raw),
        Err(LabError::UnknownKey(k)) if k == "dimm"
    ));
    let raw = RawConfig::parse("dim = many").unwrap();
    assert!(matches!(
        ScenarioConfig::load(ScenarioId::ShiftScan, &raw),
        Err(LabError::InvalidValue { .. })
    ));
    let raw = RawConfig::parse("starts = 0.1 0.2; 0.3").unwrap();
    assert!(ScenarioConfig::load(ScenarioId::Muller, &raw).is_err());
    let raw = RawConfig::parse("radii = 0.1").unwrap();
    assert!(ScenarioConfig::load(ScenarioId::MarginScan, &raw).is_err());
}

#[test]
fn overrides_replace_file_values() {
    let mut raw = RawConfig::parse("seed = 1").unwrap();
    raw.set("seed", 9);
    let ScenarioConfig::Bench(c) = ScenarioConfig::load(ScenarioId::Bench, &raw).unwrap().config else {
        panic!("wrong scenario")
    };
    assert_eq!(c.seed, 9);
}

#[test]
fn csv_format() {
    let mut r = CsvReport::new(vec![("a", "first"), ("b", "second"), ("c", "third")]);
    r.push(vec![Cell::Float(0.1), Cell::Int(3), Cell::Empty]);
    r.push(vec![Cell::Float(-1.0 / 3.0), Cell::Text("x".into()), Cell::Float(1e300)]);
    let text = r.render();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# a: first; b: second; c: third");
    assert_eq!(lines[1], "a,b,c");
    assert_eq!(lines[2], "1.0000000000000001e-1,3,");
    assert_eq!(lines[3], "-3.3333333333333331e-1,x,1.0000000000000001e300");
    // 17 significant digits round-trip exactly
    let back: f64 = lines[3].split(',').next().unwrap().parse().unwrap();
    assert_eq!(back, -1.0 / 3.0);
    assert!(text.ends_with('\n') && !text.contains('\r'));
}

#[test]
#[should_panic(expected = "ragged")]
fn csv_rows_must_be_rectangular() {
    let mut r = CsvReport::new(vec![("a", "first")]);
    r.push(vec![Cell::Int(1), Cell::Int(2)]);
}
