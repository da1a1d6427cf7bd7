use std::fs;
use std::path::PathBuf;

use hnw_cli::config::RunConfig;
use hnw_core::edgelist::parse_edge_list;

fn repo_dir(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn files(rel: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(repo_dir(rel))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    v.sort();
    v
}

#[test]
fn shipped_configs_are_valid() {
    let configs = files("configs");
    assert!(configs.len() >= 7);
    for path in configs {
        let text = fs::read_to_string(&path).unwrap();
        let cfg = RunConfig::from_toml_str(&text).unwrap_or_else(|e| panic!("{path:?}: {e}"));
        cfg.validate_single().unwrap_or_else(|e| panic!("{path:?}: {e}"));
        cfg.sweep_grids().unwrap_or_else(|e| panic!("{path:?}: {e}"));
    }
}

#[test]
fn config_fuzz_seeds_replay() {
    let mut accepted = 0;
    for path in files("fuzz/corpus/config") {
        let text = fs::read_to_string(&path).unwrap();
        if let Ok(cfg) = RunConfig::from_toml_str(&text) {
            accepted += 1;
            _ = cfg.validate_single();
            _ = cfg.sweep_grids();
            let echoed = cfg.to_toml_string();
            let back = RunConfig::from_toml_str(&echoed).unwrap();
            assert_eq!(back.to_toml_string(), echoed, "{path:?}");
        }
    }
    assert!(accepted > 0);
}

#[test]
fn edge_list_fuzz_seeds_replay() {
    let mut accepted = 0;
    for path in files("fuzz/corpus/edge_list") {
        let text = fs::read_to_string(&path).unwrap();
        if let Ok(g) = parse_edge_list(&text) {
            accepted += 1;
            g.validate().unwrap();
        }
    }
    assert_eq!(accepted, 3);
}
