#include "doctest.h"
#include "helpers.hpp"

#include "augcl/checkpoint.hpp"
#include "augcl/errors.hpp"
#include "augcl/params.hpp"

using namespace augcl;
using namespace testutil;

TEST_CASE("rng: streams are reproducible and splits are independent") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng parent(7);
  Rng left = parent.split("left"), right = parent.split("right");
  CHECK(left.key() != right.key());
  CHECK(parent.counter() == 0);
  Rng resumed = Rng::from_state(left.key(), left.counter());
  CHECK(resumed.next_u64() == left.next_u64());
  double total = 0;
  Rng u(3);
  for (int i = 0; i < 100000; ++i) {
    double x = u.uniform();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    total += x;
  }
  CHECK(total / 100000 == doctest::Approx(0.5).epsilon(0.01));
  CHECK_THROWS_AS(u.uniform_int(0), ContractViolation);
}

TEST_CASE("xavier init bounds and determinism") {
  Tensor a = xavier_init({2, 2}, 5);
  for (double x : a.data()) {
    CHECK(x >= -1.22474);
    CHECK(x <= 1.22474);
  }
  Tensor b = xavier_init({1, 1}, 9);
  CHECK(std::abs(b[0]) <= 1.73205);
  Tensor c = xavier_init({2, 2}, 5);
  for (std::size_t i = 0; i < 4; ++i) CHECK(a[i] == c[i]);
  CHECK_THROWS_AS(xavier_init({0, 3}, 1), InvalidShape);
}

TEST_CASE("autodiff: elementary gradients") {
  Tensor x = Tensor::scalar(3.0, true), y = Tensor::scalar(4.0, true);
  mul(x, y).backward();
  CHECK(x.grad()[0] == doctest::Approx(4.0));
  CHECK(y.grad()[0] == doctest::Approx(3.0));

  Tensor m = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}, true);
  sum(m).backward();
  for (double g : m.grad()) CHECK(g == 1.0);

  Tensor z = Tensor::scalar(0.0, true);
  softplus(z).backward();
  CHECK(z.grad()[0] == doctest::Approx(0.5));
}

TEST_CASE("autodiff: gradients accumulate across reuse") {
  Tensor x = Tensor::scalar(2.0, true);
  Tensor f = add(mul(x, x), x);  // x^2 + x
  f.backward();
  CHECK(x.grad()[0] == doctest::Approx(5.0));
}

TEST_CASE("autodiff: errors on non-scalar and NaN losses") {
  Tensor m = Tensor::matrix(1, 2, {1, 2}, true);
  CHECK_THROWS_AS(m.backward(), ContractViolation);
  Tensor bad = log(Tensor::scalar(-1.0, true));
  CHECK_THROWS_AS(bad.backward(), TrainingDivergence);
  CHECK_THROWS_AS(add(Tensor::zeros(2, 3), Tensor::zeros(3, 2)), ContractViolation);
  CHECK_THROWS_AS(matmul(Tensor::zeros(2, 3), Tensor::zeros(2, 3)), ContractViolation);
}

TEST_CASE("autodiff: every op matches finite differences") {
  Rng rng(11);
  Tensor a = random_tensor(3, 4, rng, -1, 1, true);
  Tensor b = random_tensor(4, 2, rng, -1, 1, true);
  Tensor c = random_tensor(3, 4, rng, 0.5, 2.0, true);
  Tensor w = random_tensor(1, 4, rng, -1, 1, true);
  std::vector<int> idx{2, 0, 2, 1};
  std::vector<std::function<Tensor()>> losses = {
      [&] { return sum(matmul(a, b) * matmul(a, b)); },
      [&] { return sum(div(a, c)) + sum(sub(a, c) * w); },
      [&] { return sum(sigmoid(a)) + sum(tanh(a * 2.0)) + sum(softplus(a)); },
      [&] { return sum(exp(a)) + sum(log(c)) + sum(pow_scalar(c, 1.5)); },
      [&] { return sum(softmax(a, 1) * c) + sum(softmax(a, 0) * c); },
      [&] { return sum(logsumexp(a, 1)) + sum(logsumexp(a, 0)); },
      [&] { return sum(l2_norm_rows(a)) + sum(normalize_rows(a) * c); },
      [&] { return sum(mean(a, 0) * w) + sum(mean(a, 1)) + mean(c) * element(sum(a, 1), 0, 0); },
      [&] { return sum(transpose(a) * transpose(c)) + sum(reshape(a, 2, 6) * reshape(c, 2, 6)); },
      [&] { return sum(concat_cols({a, c}) * concat_cols({c, a})) + sum(concat_rows({a, w}) * concat_rows({c, w})); },
      [&] { return sum(slice_rows(a, 1, 2) * slice_rows(c, 0, 2)) + sum(slice_cols(a, 1, 2)); },
      [&] { return sum(gather_rows(a, idx) * gather_rows(c, idx)); },
      [&] { return sum(scatter_add_rows(a, std::vector<int>{1, 0, 1}, 2) * slice_rows(c, 0, 2)); },
      [&] { return element(a, 1, 2) * element(c, 0, 0) + neg(sum(a * -1.0)); },
      [&] { return sum(relu(add_scalar(a, 0.05)) * c); },
  };
  for (std::size_t k = 0; k < losses.size(); ++k) {
    CAPTURE(k);
    for (Tensor* t : {&a, &b, &c, &w}) {
      double err = gradient_error(losses[k], *t);
      CHECK(err < 1e-6);
    }
  }
}

TEST_CASE("straight-through forwards hard values and routes gradient to soft") {
  Tensor soft = Tensor::row({0.2, 0.8}, true);
  Tensor hard = Tensor::row({0, 1});
  Tensor st = straight_through(hard, soft);
  CHECK(st[0] == 0.0);
  CHECK(st[1] == 1.0);
  sum(mul(st, Tensor::row({3, 5}))).backward();
  CHECK(soft.grad()[0] == 3.0);
  CHECK(soft.grad()[1] == 5.0);
}

TEST_CASE("finite_diff_grad examples") {
  Tensor x = Tensor::scalar(2.0);
  Tensor g = finite_diff_grad([](const Tensor& t) { return t[0] * t[0]; }, x, 1e-5);
  CHECK(std::abs(g[0] - 4.0) < 1e-6);
  Rng rng(1);
  Tensor y = random_tensor(3, 3, rng);
  Tensor gs = finite_diff_grad([](const Tensor& t) { return sum(t).item(); }, y, 1e-5);
  for (double v : gs.data()) CHECK(std::abs(v - 1.0) < 1e-9);
  CHECK_THROWS_AS(finite_diff_grad([](const Tensor&) { return 0.0; }, y, 0.0), ContractViolation);
}

TEST_CASE("adam: first step, zero gradient and masked update") {
  ParameterSet params;
  params.add("a", Tensor::scalar(1.0, true));
  params.add("b", Tensor::scalar(2.0, true));
  AdamState state;
  GradMap grads{{"a", {1.0}}};
  adam_step(params, grads, state, 0.1);
  CHECK(params.at("a")[0] == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(params.at("b")[0] == 2.0);
  CHECK(state.m.count("b") == 0);
  CHECK(state.step == 1);

  ParameterSet still;
  still.add("c", Tensor::row({1.0, -3.0}, true));
  AdamState s2;
  adam_step(still, {{"c", {0.0, 0.0}}}, s2, 0.1);
  CHECK(still.at("c")[0] == 1.0);
  CHECK(still.at("c")[1] == -3.0);
  CHECK(s2.step == 1);
  CHECK_THROWS_AS(adam_step(still, {{"c", {1.0}}}, s2, 0.1), ContractViolation);
}

TEST_CASE("clip_grad_norm scales to the limit") {
  GradMap g{{"a", {3.0}}, {"b", {4.0}}};
  double before = clip_grad_norm(g, 1.0);
  CHECK(before == doctest::Approx(5.0));
  CHECK(g["a"][0] == doctest::Approx(0.6));
  CHECK(g["b"][0] == doctest::Approx(0.8));
  GradMap small{{"a", {0.1}}};
  clip_grad_norm(small, 1.0);
  CHECK(small["a"][0] == 0.1);
}

TEST_CASE("parameter set: duplicates, backward collection, counts") {
  ParameterSet p;
  p.add("w", Tensor::matrix(2, 2, {1, 2, 3, 4}, true));
  p.add("unused", Tensor::row({1, 1, 1}, true));
  CHECK_THROWS(p.add("w", Tensor::scalar(0, true)));
  CHECK(p.scalar_count() == 7);
  GradMap g = backward(sum(p.at("w")), p);
  CHECK(g.at("w") == std::vector<double>{1, 1, 1, 1});
  CHECK(g.at("unused") == std::vector<double>{0, 0, 0});
}

TEST_CASE("checkpoint round trip and corruption") {
  TempDir dir;
  Checkpoint c;
  c.put_tensor("t", Tensor::matrix(2, 1, {1.5, -2.25}));
  c.put_u64("n", {1, 2, 3});
  c.put_text("s", "hello");
  auto path = dir.path / "c.bin";
  c.save(path);
  Checkpoint r = Checkpoint::load(path);
  CHECK(r.tensor("t").values == std::vector<double>{1.5, -2.25});
  CHECK(r.tensor("t").shape == Shape{2, 1});
  CHECK(r.u64("n") == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(r.text("s") == "hello");

  std::string bytes = read_file(path);
  std::string header = bytes;
  header[0] = 'X';
  CHECK_THROWS_AS(Checkpoint::deserialize(header), CheckpointError);
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x1;
  CHECK_THROWS_AS(Checkpoint::deserialize(flipped), CheckpointError);
  CHECK_THROWS_AS(Checkpoint::deserialize(bytes.substr(0, bytes.size() - 3)), CheckpointError);
  CHECK_THROWS_AS(Checkpoint::load(dir.path / "missing.bin"), CheckpointError);
}

TEST_CASE("parameters restore only when every shape matches") {
  TempDir dir;
  ParameterSet a;
  a.add("x", Tensor::row({1, 2}, true));
  a.add("y", Tensor::scalar(3, true));
  save_parameters(a, dir.path / "p.bin");

  ParameterSet b;
  b.add("x", Tensor::row({0, 0}, true));
  b.add("y", Tensor::scalar(0, true));
  load_parameters(b, dir.path / "p.bin");
  CHECK(b.at("x")[1] == 2.0);
  CHECK(b.at("y")[0] == 3.0);

  ParameterSet wrong;
  wrong.add("x", Tensor::row({9, 9}, true));
  wrong.add("y", Tensor::row({9, 9}, true));
  CHECK_THROWS_AS(load_parameters(wrong, dir.path / "p.bin"), CheckpointError);
  CHECK(wrong.at("x")[0] == 9.0);
}
