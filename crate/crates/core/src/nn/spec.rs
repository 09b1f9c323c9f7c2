use std::fmt;
use std::str::FromStr;

use super::NetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputShape {
    Image {
        channels: usize,
        height: usize,
        width: usize,
    },
    Vector {
        length: usize,
    },
}

impl InputShape {
    pub fn len(&self) -> usize {
        Shape::from(*self).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerSpec {
    /// Valid (unpadded) square convolution.
    Conv {
        out_channels: usize,
        kernel: usize,
        stride: usize,
    },
    Dense {
        units: usize,
    },
    Rectifier,
}

/// Activation shape between layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Image(usize, usize, usize),
    Flat(usize),
}

impl Shape {
    pub fn len(&self) -> usize {
        match *self {
            Shape::Image(c, h, w) => c * h * w,
            Shape::Flat(n) => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl From<InputShape> for Shape {
    fn from(s: InputShape) -> Self {
        match s {
            InputShape::Image {
                channels,
                height,
                width,
            } => Shape::Image(channels, height, width),
            InputShape::Vector { length } => Shape::Flat(length),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NetworkSpec {
    pub input: InputShape,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    /// Two strided convolutions and a wide dense layer over a stack of four
    /// 84x84 frames, one output per action.
    pub fn default_pixel() -> Self {
        use LayerSpec::*;
        Self {
            input: InputShape::Image {
                channels: 4,
                height: 84,
                width: 84,
            },
            layers: vec![
                Conv {
                    out_channels: 16,
                    kernel: 8,
                    stride: 4,
                },
                Rectifier,
                Conv {
                    out_channels: 32,
                    kernel: 4,
                    stride: 2,
                },
                Rectifier,
                Dense { units: 256 },
                Rectifier,
                Dense { units: 3 },
            ],
        }
    }

    pub fn default_feature(input_len: usize) -> Self {
        Self::mlp(input_len, &[64, 64], 3)
    }

    /// Dense layers with rectifiers between them.
    pub fn mlp(input_len: usize, hidden: &[usize], outputs: usize) -> Self {
        let mut layers = Vec::new();
        for &units in hidden {
            layers.push(LayerSpec::Dense { units });
            layers.push(LayerSpec::Rectifier);
        }
        layers.push(LayerSpec::Dense { units: outputs });
        Self {
            input: InputShape::Vector { length: input_len },
            layers,
        }
    }

    /// Activation shapes: entry `i` is the input of layer `i`, the last entry
    /// is the network output.
    pub fn shapes(&self) -> Result<Vec<Shape>, NetError> {
        let mut shapes = vec![Shape::from(self.input)];
        if shapes[0].is_empty() {
            return Err(NetError::Spec("input shape has a zero dimension".into()));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            let cur = *shapes.last().unwrap();
            let next = match (*layer, cur) {
                (
                    LayerSpec::Conv {
                        out_channels,
                        kernel,
                        stride,
                    },
                    Shape::Image(_, h, w),
                ) => {
                    if out_channels == 0 || kernel == 0 || stride == 0 {
                        return Err(NetError::Spec(format!("layer {i}: zero conv parameter")));
                    }
                    if kernel > h || kernel > w {
                        return Err(NetError::Spec(format!(
                            "layer {i}: kernel {kernel} larger than {h}x{w} input"
                        )));
                    }
                    Shape::Image(out_channels, (h - kernel) / stride + 1, (w - kernel) / stride + 1)
                }
                (LayerSpec::Conv { .. }, Shape::Flat(_)) => {
                    return Err(NetError::Spec(format!("layer {i}: convolution needs an image input")))
                }
                (LayerSpec::Dense { units }, _) => {
                    if units == 0 {
                        return Err(NetError::Spec(format!("layer {i}: dense layer with 0 units")));
                    }
                    Shape::Flat(units)
                }
                (LayerSpec::Rectifier, s) => s,
            };
            shapes.push(next);
        }
        match self.layers.last() {
            Some(LayerSpec::Dense { .. }) => Ok(shapes),
            _ => Err(NetError::Spec(
                "the last layer must be a dense layer with no nonlinearity".into(),
            )),
        }
    }

    pub fn output_units(&self) -> usize {
        match self.layers.last() {
            Some(LayerSpec::Dense { units }) => *units,
            _ => 0,
        }
    }

    pub fn input_len(&self) -> usize {
        self.input.len()
    }

    /// Names and shapes of the weight and bias tensor of each parameterised
    /// layer, in storage order.
    pub fn param_shapes(&self) -> Result<Vec<(String, Vec<usize>)>, NetError> {
        let shapes = self.shapes()?;
        let mut out = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            match (*layer, shapes[i]) {
                (
                    LayerSpec::Conv {
                        out_channels, kernel, ..
                    },
                    Shape::Image(c, _, _),
                ) => {
                    out.push((format!("layer{i}.weight"), vec![out_channels, c, kernel, kernel]));
                    out.push((format!("layer{i}.bias"), vec![out_channels]));
                }
                (LayerSpec::Dense { units }, s) => {
                    out.push((format!("layer{i}.weight"), vec![units, s.len()]));
                    out.push((format!("layer{i}.bias"), vec![units]));
                }
                _ => {}
            }
        }
        Ok(out)
    }
}

impl fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LayerSpec::Conv {
                out_channels,
                kernel,
                stride,
            } => write!(f, "conv{out_channels}k{kernel}s{stride}"),
            LayerSpec::Dense { units } => write!(f, "dense{units}"),
            LayerSpec::Rectifier => f.write_str("relu"),
        }
    }
}

/// `4x84x84:conv16k8s4,relu,...,dense3` or `42:dense64,relu,dense3`.
impl fmt::Display for NetworkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.input {
            InputShape::Image {
                channels,
                height,
                width,
            } => write!(f, "{channels}x{height}x{width}:")?,
            InputShape::Vector { length } => write!(f, "{length}:")?,
        }
        for (i, l) in self.layers.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for LayerSpec {
    type Err = NetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NetError::Spec(format!("unrecognised layer `{s}`"));
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        if s == "relu" {
            Ok(LayerSpec::Rectifier)
        } else if let Some(rest) = s.strip_prefix("dense") {
            Ok(LayerSpec::Dense { units: num(rest)? })
        } else if let Some(rest) = s.strip_prefix("conv") {
            let (oc, rest) = rest.split_once('k').ok_or_else(bad)?;
            let (k, st) = rest.split_once('s').ok_or_else(bad)?;
            Ok(LayerSpec::Conv {
                out_channels: num(oc)?,
                kernel: num(k)?,
                stride: num(st)?,
            })
        } else {
            Err(bad())
        }
    }
}

impl FromStr for NetworkSpec {
    type Err = NetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (input, layers) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| NetError::Spec(format!("missing `:` in network spec `{s}`")))?;
        let dims: Vec<usize> = input
            .split('x')
            .map(|d| {
                d.parse()
                    .map_err(|_| NetError::Spec(format!("bad input shape `{input}`")))
            })
            .collect::<Result<_, _>>()?;
        let input = match dims[..] {
            [length] => InputShape::Vector { length },
            [channels, height, width] => InputShape::Image {
                channels,
                height,
                width,
            },
            _ => return Err(NetError::Spec(format!("bad input shape `{input}`"))),
        };
        let layers = layers
            .split(',')
            .map(|l| l.trim().parse())
            .collect::<Result<Vec<_>, _>>()?;
        let spec = NetworkSpec { input, layers };
        spec.shapes()?;
        Ok(spec)
    }
}
