use super::{ExtractError, PdfBackend};

/// PDF text backend built on `pdf-extract`.
#[derive(Debug, Default, Clone, Copy)]
pub struct PdfExtractBackend;

impl PdfBackend for PdfExtractBackend {
    fn pages(&self, bytes: &[u8]) -> Result<Vec<String>, ExtractError> {
        if !bytes.starts_with(b"%PDF") {
            return Err(ExtractError::MalformedPdf("missing %PDF header".into()));
        }
        // pdf-extract panics on some malformed inputs instead of returning an error.
        let result = std::panic::catch_unwind(|| pdf_extract::extract_text_from_mem_by_pages(bytes));
        match result {
            Ok(Ok(pages)) => Ok(pages),
            Ok(Err(e)) => Err(ExtractError::MalformedPdf(e.to_string())),
            Err(_) => Err(ExtractError::MalformedPdf("PDF backend panicked".into())),
        }
    }
}
