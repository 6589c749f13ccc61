#include "vacgan/tensor.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace vacgan {

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_)) {
    throw ShapeMismatch("tensor data length " + std::to_string(data_.size()) +
                        " does not match shape " + shape_str(shape_));
  }
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw NotScalar("item() on tensor of size " + std::to_string(data_.size()));
  }
  return data_[0];
}

Tensor Tensor::reshaped(std::vector<std::size_t> new_shape) const {
  if (shape_size(new_shape) != data_.size()) {
    throw ShapeMismatch("reshape " + shape_str(shape_) + " -> " + shape_str(new_shape));
  }
  return Tensor(std::move(new_shape), data_);
}

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

namespace {

void put_u64_le(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64_le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void save_tensor(const Tensor& t, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for write: " + path);
  os.write("VTNS", 4);
  os.put(1);  // version
  os.put(static_cast<char>(t.rank()));
  for (std::size_t e : t.shape()) put_u64_le(os, e);
  for (std::size_t i = 0; i < t.size(); ++i) {
    double d = t[i];
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64_le(os, bits);
  }
  if (!os) throw IoError("write failed: " + path);
}

Tensor load_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for read: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "VTNS", 4) != 0) throw BadFormat("bad magic in " + path);
  int version = is.get();
  if (version != 1) throw BadFormat("unsupported VTNS version in " + path);
  int rank = is.get();
  if (rank < 0 || rank > 8) throw BadFormat("bad rank in " + path);
  std::vector<std::size_t> shape(static_cast<std::size_t>(rank));
  for (auto& e : shape) e = static_cast<std::size_t>(get_u64_le(is));
  std::vector<double> data(shape_size(shape));
  for (auto& d : data) {
    std::uint64_t bits = get_u64_le(is);
    std::memcpy(&d, &bits, 8);
  }
  if (!is) throw BadFormat("truncated tensor file " + path);
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace vacgan
