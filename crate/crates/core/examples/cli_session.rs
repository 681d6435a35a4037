//! Drive the command-line front end in-process, as the `stfxml` binary
//! does, and print each command's exit code and output.
//!
//! ```text
//! cargo run --example cli_session
//! ```

use stfxml::cli::run;

fn main() {
    let fixture = |name: &str| format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    let sessions: Vec<Vec<String>> = vec![
        vec!["check".into(), fixture("exampleOneResult.xml")],
        vec![
            "validate".into(),
            "--schema".into(),
            fixture("atwdReadout.xsd"),
            fixture("atwdExample.xml"),
        ],
        vec![
            "xpath".into(),
            "count(stf:test/inputParameter)".into(),
            fixture("exampleOne.xml"),
        ],
        vec!["stf".into(), "gen-header".into(), fixture("exampleOne.xml")],
        vec![
            "bind".into(),
            "--schema".into(),
            fixture("atwdReadout.xsd"),
            fixture("atwdExample-corrected.xml"),
            "--count".into(),
            "atwd[0]/channel".into(),
        ],
    ];
    for args in sessions {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let argv = std::iter::once("stfxml".to_string()).chain(args.iter().cloned());
        let code = run(argv, &mut std::io::empty(), &mut out, &mut err);
        println!(
            "$ stfxml {}  -> exit {code}",
            args.join(" ").replace(env!("CARGO_MANIFEST_DIR"), ".")
        );
        let text = format!("{}{}", String::from_utf8_lossy(&out), String::from_utf8_lossy(&err));
        print!("{}", text.replace(env!("CARGO_MANIFEST_DIR"), "."));
    }
}
