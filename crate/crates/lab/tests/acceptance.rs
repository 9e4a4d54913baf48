//! Runs every acceptance criterion and prints one line per criterion.
//! `BREGMAN_ACCEPTANCE_SCALE=quick` selects the reduced horizons.

use std::process::ExitCode;

use bregman_lab::acceptance::{covers_all_criteria, CRITERIA};
use bregman_lab::{acceptance_suite, Scale, Status, SuiteOptions};

fn scale() -> Scale {
    match std::env::var("BREGMAN_ACCEPTANCE_SCALE").as_deref() {
        Ok("quick") => Scale::Quick,
        _ => Scale::Full,
    }
}

fn main() -> ExitCode {
    let out = tempfile::tempdir().expect("tempdir");
    let opts = SuiteOptions {
        out: Some(out.path().to_path_buf()),
        ..SuiteOptions::new(scale(), 42)
    };
    println!(
        "acceptance suite, scale {:?}, seed {}",
        opts.scale, opts.seed
    );
    let summary = acceptance_suite(&opts, &mut |c| println!("{}", c.line()));
    summary.write(out.path()).expect("summary.json");
    let failed: Vec<&str> = summary
        .checks
        .iter()
        .filter(|c| c.status == Status::Fail)
        .map(|c| c.name.as_str())
        .collect();
    println!(
        "{} of {CRITERIA} criteria pass",
        summary.checks.len() - failed.len()
    );
    let mut ok = failed.is_empty() && covers_all_criteria(&summary);
    if !failed.is_empty() {
        println!("failed: {failed:?}");
    }

    // Negative control: overstated step sizes must break the bound check.
    let neg = acceptance_suite(
        &SuiteOptions {
            negative_control: true,
            ..SuiteOptions::new(Scale::Quick, 42)
        },
        &mut |_| {},
    );
    let c4 = neg
        .checks
        .iter()
        .find(|c| c.criterion == Some(4))
        .expect("criterion 4");
    let caught = c4.status == Status::Fail && !neg.all_pass;
    println!(
        "negative control (eps x100): criterion 4 {:?}, suite all_pass={}",
        c4.status, neg.all_pass
    );
    ok &= caught;

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
