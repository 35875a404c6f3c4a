#![no_main]
use libfuzzer_sys::fuzz_target;
use sparse_pca::bench::{parse_report_csv, ReportFormat};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(report) = parse_report_csv(text) {
        let _ = report.render(ReportFormat::Markdown);
        if let Ok(csv) = report.render(ReportFormat::Csv) {
            let again = parse_report_csv(&csv).expect("own output parses");
            assert_eq!(report.rows.len(), again.rows.len());
        }
    }
});
