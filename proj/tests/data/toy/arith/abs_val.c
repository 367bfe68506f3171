int abs_val(int x) {
  if (x < 0)
    return -x;
  return x;
}
