#include "pyrafem/forms.hpp"

#include "pyrafem/errors.hpp"

namespace pyrafem {

bool FormPoly::is_zero() const {
  for (const auto& c : comp)
    if (!c.is_zero()) return false;
  return true;
}

FormPoly FormPoly::operator+(const FormPoly& o) const {
  FormPoly r = *this;
  for (std::size_t i = 0; i < comp.size(); ++i) r.comp[i] += o.comp[i];
  return r;
}

FormPoly FormPoly::operator-(const FormPoly& o) const {
  FormPoly r = *this;
  for (std::size_t i = 0; i < comp.size(); ++i) r.comp[i] -= o.comp[i];
  return r;
}

FormPoly FormPoly::scaled(const Rational& r) const {
  FormPoly out = *this;
  for (auto& c : out.comp) c = c.scaled(r);
  return out;
}

FormPoly exterior_derivative(const FormPoly& u) {
  switch (u.s) {
    case 0: {
      const RationalPoly& f = u.comp[0];
      return FormPoly(1, {f.derivative(Axis::X), f.derivative(Axis::Y),
                          f.derivative(Axis::Z)});
    }
    case 1: {
      const auto& c = u.comp;
      return FormPoly(
          2, {c[2].derivative(Axis::Y) - c[1].derivative(Axis::Z),
              c[0].derivative(Axis::Z) - c[2].derivative(Axis::X),
              c[1].derivative(Axis::X) - c[0].derivative(Axis::Y)});
    }
    case 2: {
      const auto& c = u.comp;
      RationalPoly d = c[0].derivative(Axis::X);
      d += c[1].derivative(Axis::Y);
      d += c[2].derivative(Axis::Z);
      return FormPoly(3, {d});
    }
    default:
      throw DegreeError("exterior derivative undefined for 3-forms");
  }
}

std::vector<RationalPoly> pullback_components(const FormPoly& u) {
  return infinite_weight(u.s).apply(u.comp);
}

void MonomialIndex::absorb(const FormPoly& u) {
  for (const auto& c : u.comp)
    for (const auto& [m, coeff] : c.terms()) {
      (void)coeff;
      if (index_.emplace(m, monomials_.size()).second) monomials_.push_back(m);
    }
}

std::vector<Rational> MonomialIndex::flatten(const FormPoly& u) const {
  std::vector<Rational> v(size(), Rational(0));
  std::size_t nm = index_.size();
  for (std::size_t i = 0; i < u.comp.size(); ++i)
    for (const auto& [m, coeff] : u.comp[i].terms()) {
      auto it = index_.find(m);
      if (it == index_.end())
        throw Error("MonomialIndex::flatten: unregistered monomial");
      v[i * nm + it->second] = coeff;
    }
  return v;
}

FormPoly MonomialIndex::unflatten(const std::vector<Rational>& v) const {
  FormPoly u = FormPoly::zero(s_);
  std::size_t nm = index_.size();
  for (std::size_t i = 0; i < u.comp.size(); ++i)
    for (std::size_t j = 0; j < nm; ++j)
      if (v[i * nm + j] != 0) u.comp[i].add_term(monomials_[j], v[i * nm + j]);
  return u;
}

}  // namespace pyrafem
