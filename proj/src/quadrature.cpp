// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#include "afem/quadrature.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace afem
{

namespace
{

void push_orbit3(QuadRule& r, double w, double a, double b)
{
  r.pts.push_back({a, b, b, w});
  r.pts.push_back({b, a, b, w});
  r.pts.push_back({b, b, a, w});
}

void push_orbit6(QuadRule& r, double w, double a, double b, double c)
{
  r.pts.push_back({a, b, c, w});
  r.pts.push_back({a, c, b, w});
  r.pts.push_back({b, a, c, w});
  r.pts.push_back({b, c, a, w});
  r.pts.push_back({c, a, b, w});
  r.pts.push_back({c, b, a, w});
}

// The published weights carry 15 digits; rescaling makes the weight sum exactly one.
void normalize(QuadRule& r)
{
  double s = 0.0;
  for (const QuadPoint& q : r.pts)
    s += q.w;
  for (QuadPoint& q : r.pts)
    q.w /= s;
}

QuadRule make_degree4()
{
  QuadRule r;
  r.exactness = 4;
  push_orbit3(r, 0.223381589678011, 0.108103018168070, 0.445948490915965);
  push_orbit3(r, 0.109951743655322, 0.816847572980459, 0.091576213509771);
  normalize(r);
  return r;
}

QuadRule make_degree6()
{
  QuadRule r;
  r.exactness = 6;
  push_orbit3(r, 0.116786275726379, 0.501426509658179, 0.249286745170910);
  push_orbit3(r, 0.050844906370207, 0.873821971016996, 0.063089014491502);
  push_orbit6(r, 0.082851075618374, 0.053145049844816, 0.310352451033785,
              0.636502499121399);
  normalize(r);
  return r;
}

QuadRule make_degree8()
{
  QuadRule r;
  r.exactness = 8;
  double third = 1.0 / 3.0;
  r.pts.push_back({third, third, third, 0.1443156076777871682510911104890646});
  push_orbit3(r, 0.0950916342672846247938961043116135, 0.0814148234145536879423689710116614,
              0.4592925882927231560288155144941693);
  push_orbit3(r, 0.1032173705347182502817915502921290, 0.6588613844964795867554129970170710,
              0.1705693077517602066222935014914645);
  push_orbit3(r, 0.0324584976231980803109259283417806, 0.8989055433659380490831528988068022,
              0.0505472283170309754584235505965989);
  push_orbit6(r, 0.0272303141744349942648446900739089, 0.0083947774099576053372138345392944,
              0.2631128296346381134217857862846436, 0.7284923929554042812409903791760620);
  normalize(r);
  return r;
}

} // namespace

const QuadRule& triangle_rule(int degree)
{
  if (degree < 1 || degree > 3)
    throw std::invalid_argument("triangle_rule: degree must be 1, 2 or 3");
  return triangle_rule_exact(2 * degree + 2);
}

const QuadRule& triangle_rule_exact(int poly_degree)
{
  static const QuadRule d4 = make_degree4();
  static const QuadRule d6 = make_degree6();
  static const QuadRule d8 = make_degree8();
  static std::map<int, QuadRule> conical;
  if (poly_degree <= 4)
    return d4;
  if (poly_degree <= 6)
    return d6;
  if (poly_degree <= 8)
    return d8;
  int n = (poly_degree + 3) / 2; // 2n-2 >= poly_degree
  auto it = conical.find(n);
  if (it == conical.end())
    it = conical.emplace(n, conical_rule(n)).first;
  return it->second;
}

const GaussRule& gauss_legendre(int n)
{
  static std::map<int, GaussRule> cache;
  auto it = cache.find(n);
  if (it != cache.end())
    return it->second;
  if (n < 1)
    throw std::invalid_argument("gauss_legendre: need at least one point");

  // Nodes on (-1,1) by Newton iteration on the Legendre recurrence, then mapped
  // to [0,1] with weights rescaled to sum to one.
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; i++)
  {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; iter++)
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; k++)
      {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15)
        break;
    }
    r.x[i] = 0.5 * (1.0 - x); // descending cos order becomes ascending in [0,1]
    r.w[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return cache.emplace(n, std::move(r)).first->second;
}

QuadRule conical_rule(int n)
{
  const GaussRule& g = gauss_legendre(n);
  QuadRule r;
  r.exactness = 2 * n - 2;
  r.pts.reserve(n * n);
  // Collapsed-square map (u,v) -> (u(1-v), v); the Jacobian factor 1-v joins the
  // weight, and the factor two normalizes against the reference area 1/2.
  for (int j = 0; j < n; j++)
    for (int i = 0; i < n; i++)
    {
      double x = g.x[i] * (1.0 - g.x[j]);
      double y = g.x[j];
      r.pts.push_back({1.0 - x - y, x, y, 2.0 * g.w[i] * g.w[j] * (1.0 - g.x[j])});
    }
  return r;
}

} // namespace afem
