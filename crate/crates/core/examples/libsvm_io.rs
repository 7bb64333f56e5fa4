//! Parsing, scaling, hashing and writing LibSVM data, plus a trace CSV
//! round trip.

use lcd_core::io::{parse_libsvm, read_trace_csv, write_libsvm, write_trace_csv, LabelMode};
use lcd_core::objectives::logistic_lp;
use lcd_core::solvers::{run, Method, SolverConfig};

const TEXT: &str = "\
# label index:value ...
0 1:0.5 3:2
1 2:-1.25
0 1:3 2:1 3:0.75
";

fn main() -> lcd_core::Result<()> {
    let mut data = parse_libsvm(TEXT.as_bytes(), LabelMode::Classification, "inline")?;
    println!("{} × {}, labels {:?}", data.n(), data.d(), data.labels.as_slice());
    println!("hash {}", &data.content_hash()[..16]);
    data.min_max_scale();
    println!("scaled rows:{}", data.rows);

    let mut out = Vec::new();
    write_libsvm(&data, &mut out)?;
    print!("{}", String::from_utf8_lossy(&out));

    match parse_libsvm("1 1:1\n-1 2:1 1:3\n".as_bytes(), LabelMode::Classification, "bad") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!("indices must increase"),
    }

    let obj = logistic_lp(&data.rows, &data.labels, 0.1, 2.0)?.with_f_star(0.0);
    let trace = run(&obj, &SolverConfig::new(Method::Lcd2, 5), &lcd_core::matrix::Vector::zeros(data.d()))?;
    let mut csv = Vec::new();
    write_trace_csv(&trace, &mut csv)?;
    let back = read_trace_csv(csv.as_slice())?;
    println!("CSV round trip exact: {}", back == trace.records);
    Ok(())
}
