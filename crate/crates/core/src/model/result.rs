use std::fmt;
use std::str::FromStr;

use ndarray::{ArrayD, ArrayView3, Axis, IxDyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Domain of the step axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnalysisType {
    Static,
    Transient,
    Harmonic,
    Eigenfrequency,
}

impl AnalysisType {
    pub fn as_str(self) -> &'static str {
        match self {
            AnalysisType::Static => "static",
            AnalysisType::Transient => "transient",
            AnalysisType::Harmonic => "harmonic",
            AnalysisType::Eigenfrequency => "eigenfrequency",
        }
    }

    /// Frequency-domain analyses default to complex data.
    pub fn default_complex(self) -> bool {
        matches!(self, AnalysisType::Harmonic | AnalysisType::Eigenfrequency)
    }
}

impl fmt::Display for AnalysisType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnalysisType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "static" => Ok(AnalysisType::Static),
            "transient" => Ok(AnalysisType::Transient),
            "harmonic" => Ok(AnalysisType::Harmonic),
            "eigenfrequency" => Ok(AnalysisType::Eigenfrequency),
            other => Err(Error::InvalidArgument(format!("unknown analysis type '{other}'"))),
        }
    }
}

/// Where a result lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResType {
    Node,
    Element,
    Region,
}

impl ResType {
    pub fn is_field(self) -> bool {
        !matches!(self, ResType::Region)
    }
}

/// Dense result values, real or complex.
#[derive(Debug, Clone, PartialEq)]
pub enum ResultData {
    Real(ArrayD<f64>),
    Complex(ArrayD<Complex64>),
}

impl ResultData {
    pub fn shape(&self) -> &[usize] {
        match self {
            ResultData::Real(a) => a.shape(),
            ResultData::Complex(a) => a.shape(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, ResultData::Complex(_))
    }

    pub fn as_real(&self) -> Option<&ArrayD<f64>> {
        match self {
            ResultData::Real(a) => Some(a),
            ResultData::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&ArrayD<Complex64>> {
        match self {
            ResultData::Complex(a) => Some(a),
            ResultData::Real(_) => None,
        }
    }

    /// Real part (the data itself for real arrays).
    pub fn real_part(&self) -> ArrayD<f64> {
        match self {
            ResultData::Real(a) => a.clone(),
            ResultData::Complex(a) => a.mapv(|c| c.re),
        }
    }

    pub fn imag_part(&self) -> ArrayD<f64> {
        match self {
            ResultData::Real(a) => ArrayD::zeros(a.raw_dim()),
            ResultData::Complex(a) => a.mapv(|c| c.im),
        }
    }

    pub fn to_complex(&self) -> ArrayD<Complex64> {
        match self {
            ResultData::Real(a) => a.mapv(|x| Complex64::new(x, 0.0)),
            ResultData::Complex(a) => a.clone(),
        }
    }

    fn into_kind(self, complex: bool) -> ResultData {
        match (self, complex) {
            (ResultData::Real(a), true) => ResultData::Complex(a.mapv(|x| Complex64::new(x, 0.0))),
            (ResultData::Complex(a), false) => ResultData::Real(a.mapv(|c| c.re)),
            (d, _) => d,
        }
    }
}

impl From<ArrayD<f64>> for ResultData {
    fn from(a: ArrayD<f64>) -> Self {
        ResultData::Real(a)
    }
}

impl From<ArrayD<Complex64>> for ResultData {
    fn from(a: ArrayD<Complex64>) -> Self {
        ResultData::Complex(a)
    }
}

impl From<ndarray::Array3<f64>> for ResultData {
    fn from(a: ndarray::Array3<f64>) -> Self {
        ResultData::Real(a.into_dyn())
    }
}

impl From<ndarray::Array2<f64>> for ResultData {
    fn from(a: ndarray::Array2<f64>) -> Self {
        ResultData::Real(a.into_dyn())
    }
}

impl From<ndarray::Array3<Complex64>> for ResultData {
    fn from(a: ndarray::Array3<Complex64>) -> Self {
        ResultData::Complex(a.into_dyn())
    }
}

impl From<ndarray::Array2<Complex64>> for ResultData {
    fn from(a: ndarray::Array2<Complex64>) -> Self {
        ResultData::Complex(a.into_dyn())
    }
}

/// Openly documented quantity names understood by openCFS acoustic PDEs.
pub const KNOWN_QUANTITIES: &[&str] = &[
    "acouPressure",
    "acouVelocity",
    "acouPotential",
    "acoutIntensity",
    "fluidMechVelocity",
    "meanFluidMechVelocity",
    "fluidMechPressure",
    "fluidMechDensity",
    "fluidMechVorticity",
    "fluidMechGradPressure",
    "acouRhsLoad",
    "acouRhsLoadP",
    "vortexRhsLoad",
    "acouDivLighthillTensor",
];

/// Returns true for names from [`KNOWN_QUANTITIES`]; logs a warning otherwise.
/// Any string is a valid quantity, but only these are read back by openCFS.
pub fn check_quantity_name(name: &str) -> bool {
    let known = KNOWN_QUANTITIES.contains(&name);
    if !known {
        log::warn!("quantity '{name}' is not an openCFS field name; openCFS will not read it as input");
    }
    known
}

/// Dimension names chosen from the number of components.
pub fn default_dim_names(num_dims: usize) -> Vec<String> {
    let names: &[&str] = match num_dims {
        1 => &["-"],
        3 => &["x", "y", "z"],
        6 => &["xx", "yy", "zz", "yz", "xz", "xy"],
        _ => &[],
    };
    if names.is_empty() {
        (1..=num_dims).map(|i| format!("d{i}")).collect()
    } else {
        names.iter().map(|s| s.to_string()).collect()
    }
}

/// Metadata describing one result array.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultInfo {
    pub quantity: String,
    pub region: String,
    pub res_type: ResType,
    pub dim_names: Vec<String>,
    pub analysis_type: AnalysisType,
    pub is_complex: bool,
}

/// Result values with their metadata. Field data (node/element) has shape
/// `(steps, dofs, dims)`, history data (region) has shape `(steps, dims)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultArray {
    data: ResultData,
    info: ResultInfo,
    step_values: Vec<f64>,
    multi_step_id: u32,
}

/// Builder for [`ResultArray`].
#[derive(Debug, Clone)]
pub struct ResultArrayBuilder {
    quantity: String,
    region: String,
    res_type: ResType,
    dim_names: Option<Vec<String>>,
    step_values: Option<Vec<f64>>,
    analysis_type: AnalysisType,
    is_complex: Option<bool>,
    multi_step_id: u32,
}

impl ResultArrayBuilder {
    pub fn analysis(mut self, analysis_type: AnalysisType) -> Self {
        self.analysis_type = analysis_type;
        self
    }

    pub fn steps(mut self, step_values: Vec<f64>) -> Self {
        self.step_values = Some(step_values);
        self
    }

    pub fn dim_names<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.dim_names = Some(names.into_iter().map(Into::into).collect());
        self
    }

    /// Forces complex (or real) storage instead of the analysis-type default.
    pub fn complex(mut self, is_complex: bool) -> Self {
        self.is_complex = Some(is_complex);
        self
    }

    pub fn multi_step(mut self, id: u32) -> Self {
        self.multi_step_id = id;
        self
    }

    /// Validates shape/metadata and builds the array. Without explicit step
    /// values, steps are numbered 1..=N.
    pub fn build(self, data: impl Into<ResultData>) -> Result<ResultArray> {
        let data: ResultData = data.into();
        let shape = data.shape().to_vec();
        let expected_rank = if self.res_type.is_field() { 3 } else { 2 };
        if shape.len() != expected_rank {
            return Err(Error::InvalidResult(format!(
                "{} data for '{}' must have rank {expected_rank}, got shape {shape:?}",
                if self.res_type.is_field() { "field" } else { "history" },
                self.quantity
            )));
        }
        if self.quantity.is_empty() || self.region.is_empty() {
            return Err(Error::InvalidResult("quantity and region must be non-empty".into()));
        }
        let n = shape[0];
        let d = shape[expected_rank - 1];
        let step_values = self
            .step_values
            .unwrap_or_else(|| (1..=n).map(|i| i as f64).collect());
        if step_values.len() != n {
            return Err(Error::InvalidResult(format!(
                "'{}': {} step values for {n} steps",
                self.quantity,
                step_values.len()
            )));
        }
        if step_values.iter().any(|v| !v.is_finite()) || step_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidResult(format!(
                "'{}': step values must be finite and strictly increasing",
                self.quantity
            )));
        }
        let dim_names = match self.dim_names {
            Some(names) if names.len() != d => {
                return Err(Error::InvalidResult(format!(
                    "'{}': {} dim names for {d} dimensions",
                    self.quantity,
                    names.len()
                )))
            }
            Some(names) => names,
            None => default_dim_names(d),
        };
        let is_complex = self
            .is_complex
            .unwrap_or_else(|| self.analysis_type.default_complex());
        Ok(ResultArray {
            data: data.into_kind(is_complex),
            info: ResultInfo {
                quantity: self.quantity,
                region: self.region,
                res_type: self.res_type,
                dim_names,
                analysis_type: self.analysis_type,
                is_complex,
            },
            step_values,
            multi_step_id: self.multi_step_id,
        })
    }
}

impl ResultArray {
    pub fn builder(
        quantity: impl Into<String>,
        region: impl Into<String>,
        res_type: ResType,
    ) -> ResultArrayBuilder {
        ResultArrayBuilder {
            quantity: quantity.into(),
            region: region.into(),
            res_type,
            dim_names: None,
            step_values: None,
            analysis_type: AnalysisType::Transient,
            is_complex: None,
            multi_step_id: 1,
        }
    }

    /// Builder pre-filled with this array's metadata.
    pub fn to_builder(&self) -> ResultArrayBuilder {
        ResultArrayBuilder {
            quantity: self.info.quantity.clone(),
            region: self.info.region.clone(),
            res_type: self.info.res_type,
            dim_names: Some(self.info.dim_names.clone()),
            step_values: Some(self.step_values.clone()),
            analysis_type: self.info.analysis_type,
            is_complex: Some(self.info.is_complex),
            multi_step_id: self.multi_step_id,
        }
    }

    pub fn data(&self) -> &ResultData {
        &self.data
    }

    pub fn into_data(self) -> ResultData {
        self.data
    }

    pub fn info(&self) -> &ResultInfo {
        &self.info
    }

    pub fn quantity(&self) -> &str {
        &self.info.quantity
    }

    pub fn region(&self) -> &str {
        &self.info.region
    }

    pub fn res_type(&self) -> ResType {
        self.info.res_type
    }

    pub fn dim_names(&self) -> &[String] {
        &self.info.dim_names
    }

    pub fn analysis_type(&self) -> AnalysisType {
        self.info.analysis_type
    }

    pub fn is_complex(&self) -> bool {
        self.info.is_complex
    }

    pub fn step_values(&self) -> &[f64] {
        &self.step_values
    }

    pub fn multi_step_id(&self) -> u32 {
        self.multi_step_id
    }

    pub fn num_steps(&self) -> usize {
        self.data.shape()[0]
    }

    /// Number of DOFs (1 for history data).
    pub fn num_dofs(&self) -> usize {
        let s = self.data.shape();
        if s.len() == 3 {
            s[1]
        } else {
            1
        }
    }

    pub fn num_dims(&self) -> usize {
        *self.data.shape().last().unwrap()
    }

    pub fn is_history(&self) -> bool {
        !self.info.res_type.is_field()
    }

    /// Real data viewed as `(steps, dofs, dims)`; history data gets dofs = 1.
    pub fn real_view3(&self) -> Option<ArrayView3<'_, f64>> {
        let a = self.data.as_real()?;
        Some(view3(a))
    }

    pub fn complex_view3(&self) -> Option<ArrayView3<'_, Complex64>> {
        let a = self.data.as_complex()?;
        Some(view3(a))
    }
}

fn view3<T>(a: &ArrayD<T>) -> ArrayView3<'_, T> {
    let v = a.view();
    let v = if v.ndim() == 2 { v.insert_axis(Axis(1)) } else { v };
    v.into_dimensionality().expect("rank validated at construction")
}

/// Reshapes `(steps, dofs, dims)` data back to the rank required by `res_type`.
pub(crate) fn from_view3<T: Clone>(a: ndarray::Array3<T>, res_type: ResType) -> ArrayD<T> {
    if res_type.is_field() {
        a.into_dyn()
    } else {
        let (n, _, d) = a.dim();
        a.into_shape(IxDyn(&[n, d])).expect("history data has one dof")
    }
}

fn array_key(a: &ResultArray) -> (bool, &str, &str, u8) {
    let rt = match a.res_type() {
        ResType::Node => 0,
        ResType::Element => 1,
        ResType::Region => 2,
    };
    (a.is_history(), a.quantity(), a.region(), rt)
}

/// Results of one multi-step: analysis type, step values and arrays.
///
/// Arrays are kept ordered by (field before history, quantity, region), which
/// is also the order in which they are read back from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultContainer {
    analysis_type: AnalysisType,
    multi_step_id: u32,
    step_values: Vec<f64>,
    arrays: Vec<ResultArray>,
}

impl Default for ResultContainer {
    fn default() -> Self {
        Self::new(AnalysisType::Transient, 1)
    }
}

impl ResultContainer {
    pub fn new(analysis_type: AnalysisType, multi_step_id: u32) -> Self {
        ResultContainer {
            analysis_type,
            multi_step_id,
            step_values: Vec::new(),
            arrays: Vec::new(),
        }
    }

    /// Container holding the given arrays; analysis type and multi-step come
    /// from the first array.
    pub fn from_arrays(arrays: Vec<ResultArray>) -> Result<Self> {
        let mut c = match arrays.first() {
            Some(a) => ResultContainer::new(a.analysis_type(), a.multi_step_id()),
            None => ResultContainer::default(),
        };
        for a in arrays {
            c.push(a)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, array: ResultArray) -> Result<()> {
        if array.analysis_type() != self.analysis_type || array.multi_step_id() != self.multi_step_id {
            return Err(Error::InvalidResult(format!(
                "array '{}' is {} / multi-step {}, container is {} / multi-step {}",
                array.quantity(),
                array.analysis_type(),
                array.multi_step_id(),
                self.analysis_type,
                self.multi_step_id
            )));
        }
        if self.arrays.iter().any(|a| {
            a.quantity() == array.quantity() && a.region() == array.region() && a.res_type() == array.res_type()
        }) {
            return Err(Error::InvalidResult(format!(
                "duplicate array '{}' on region '{}'",
                array.quantity(),
                array.region()
            )));
        }
        for &s in array.step_values() {
            if !self.step_values.iter().any(|v| v.to_bits() == s.to_bits()) {
                self.step_values.push(s);
            }
        }
        self.step_values.sort_by(f64::total_cmp);
        let key = array_key(&array);
        let pos = self.arrays.partition_point(|a| array_key(a) < key);
        self.arrays.insert(pos, array);
        Ok(())
    }

    pub fn analysis_type(&self) -> AnalysisType {
        self.analysis_type
    }

    pub fn multi_step_id(&self) -> u32 {
        self.multi_step_id
    }

    /// Sorted union of the step values of all arrays.
    pub fn step_values(&self) -> &[f64] {
        &self.step_values
    }

    pub fn arrays(&self) -> &[ResultArray] {
        &self.arrays
    }

    pub fn into_arrays(self) -> Vec<ResultArray> {
        self.arrays
    }

    pub fn is_empty(&self) -> bool {
        self.arrays.is_empty()
    }

    pub fn infos(&self) -> Vec<ResultInfo> {
        self.arrays.iter().map(|a| a.info().clone()).collect()
    }

    pub fn quantities(&self) -> Vec<&str> {
        let mut q: Vec<&str> = self.arrays.iter().map(|a| a.quantity()).collect();
        q.dedup();
        q
    }

    pub fn get(&self, quantity: &str, region: &str) -> Option<&ResultArray> {
        self.arrays
            .iter()
            .find(|a| a.quantity() == quantity && a.region() == region)
    }
}
