use std::path::PathBuf;

use currentkit::currents::SimplicialChain;
use currentkit::forms::{integrate_over_chain, PolynomialForm, Quadrature, TriangleRule};
use serde::Serialize;

use crate::{read_input, CliResult};

#[derive(clap::Args)]
pub struct Args {
    /// PolynomialForm JSON `{d, k, terms}` of grade k − 1.
    form: PathBuf,
    /// Chain JSON `{complex, k, coeffs}`.
    chain: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
}

// exact for degree 9 on segments and degree 5 on triangles
const QUADRATURE: Quadrature = Quadrature {
    segment_points: 5,
    triangle: TriangleRule::SevenPoint,
};

pub fn check(form: &PolynomialForm, chain: &SimplicialChain) -> CliResult<Report> {
    let lhs = integrate_over_chain(&form.exterior_derivative_form()?, chain, QUADRATURE)?;
    let rhs = integrate_over_chain(form, &chain.boundary()?, QUADRATURE)?;
    Ok(Report {
        lhs,
        rhs,
        diff: (lhs - rhs).abs(),
    })
}

pub fn run(args: Args) -> CliResult<()> {
    let form = PolynomialForm::from_json(&read_input(&args.form)?)?;
    let chain = SimplicialChain::from_json(&read_input(&args.chain)?)?;
    println!("{}", serde_json::to_string_pretty(&check(&form, &chain)?)?);
    Ok(())
}
