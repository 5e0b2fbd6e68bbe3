#include <stdio.h>

int maxval(const int *a, int n) {
  int m = a[0];
  for (int i = 1; i < n; i++)
    if (a[i] > m) m = a[i];
  return m;
}

int minval(const int *a, int n) {
  int m = a[0];
  for (int i = 1; i < n; i++)
    if (a[i] < m) m = a[i];
  return m;
}

int main(void) {
  int a[5] = {3, 9, -2, 7, 4};
  printf("%d %d\n", maxval(a, 5), minval(a, 5));
  return 0;
}
