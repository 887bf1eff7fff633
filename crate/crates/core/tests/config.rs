use nk_elb::model::{derive_composites, load_config, parse_config, Nkpc, ParamSet};
use nk_elb::Error;

const BASE: &str = "beta=0.99\nkappa=0.1\neta=0.01\nphi_pi=1.5\ndelta=0.05\ns_c=0.8\neps_g=0.1\np=0.7\nnkpc=static\n";

#[test]
fn round_trip_baseline() {
    assert_eq!(parse_config(BASE).unwrap(), ParamSet::baseline());
}

#[test]
fn kappa_from_price_adjustment() {
    let text = BASE.replace("kappa=0.1\n", "psi=5\nnu=50 # slope psi/nu\n");
    let set = parse_config(&text).unwrap();
    let par = derive_composites(&set).unwrap();
    assert!((par.kappa - 0.1).abs() < 1e-15);
    let clash = BASE.replace("kappa=0.1\n", "kappa=0.2\npsi=5\nnu=50\n");
    assert!(matches!(
        parse_config(&clash),
        Err(Error::InconsistentKappa { .. })
    ));
}

#[test]
fn config_errors_are_classified() {
    let missing = BASE.replace("p=0.7\n", "");
    let unknown = format!("{BASE}gamma=2\n");
    let dup = format!("{BASE}beta=0.98\n");
    let bad = BASE.replace("nkpc=static", "nkpc=backward");
    for text in [missing, unknown, dup, bad, "beta 0.99".to_string()] {
        let e = parse_config(&text).unwrap_err();
        assert!(e.is_config_error(), "{e}");
    }
    let hybrid = parse_config(&BASE.replace("static", "hybrid")).unwrap();
    assert_eq!(hybrid.nkpc, Nkpc::Hybrid);
}

#[test]
fn out_of_range_values_are_rejected() {
    for (key, value) in [
        ("beta", "1.2"),
        ("phi_pi", "0.9"),
        ("p", "1.0"),
        ("s_c", "1.5"),
        ("delta", "0"),
    ] {
        let text = BASE
            .lines()
            .map(|l| {
                if l.starts_with(&format!("{key}=")) {
                    format!("{key}={value}")
                } else {
                    l.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join("\n");
        let set = parse_config(&text).unwrap();
        assert!(
            matches!(derive_composites(&set), Err(Error::InvalidParameter { .. })),
            "{key}={value}"
        );
    }
}

#[test]
fn load_from_file() {
    let path = std::env::temp_dir().join(format!("nk-elb-config-{}.cfg", std::process::id()));
    std::fs::write(&path, BASE).unwrap();
    let par = load_config(&path).unwrap();
    assert_eq!(par.q, 1.0 - 0.05);
    std::fs::remove_file(&path).unwrap();
    assert!(matches!(load_config(&path), Err(Error::Io(_))));
}
