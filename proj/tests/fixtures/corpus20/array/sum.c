#include <stdio.h>

int sum(const int *a, int n) {
  int s = 0;
  for (int i = 0; i < n; i++) s += a[i];
  return s;
}

int main(void) {
  int a[16];
  for (int i = 0; i < 16; i++) a[i] = i * i;
  printf("%d\n", sum(a, 16));
  return 0;
}
