//! Minimal CSV writer: header row, comma separator, LF endings and floats
//! printed with 17 significant digits so output is bit-exact across platforms.

pub struct Table {
    buf: String,
    width: usize,
}

pub struct Row<'a> {
    t: &'a mut Table,
    cells: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { buf: header.join(",") + "\n", width: header.len() }
    }

    pub fn row(&mut self) -> Row<'_> {
        Row { t: self, cells: 0 }
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf.into_bytes()
    }
}

impl Row<'_> {
    fn cell(mut self, s: &str) -> Self {
        if self.cells > 0 {
            self.t.buf.push(',');
        }
        self.t.buf.push_str(s);
        self.cells += 1;
        self
    }

    pub fn num(self, v: f64) -> Self {
        self.cell(&format!("{v:.16e}"))
    }

    pub fn int(self, v: u64) -> Self {
        self.cell(&v.to_string())
    }

    pub fn text(self, s: &str) -> Self {
        self.cell(s)
    }
}

impl Drop for Row<'_> {
    fn drop(&mut self) {
        debug_assert_eq!(self.cells, self.t.width, "row width differs from header");
        self.t.buf.push('\n');
    }
}
