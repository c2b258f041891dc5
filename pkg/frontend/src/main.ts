/** DOM bootstrap: binds the console controller to the page. */

import { ApiClient } from "./api.js";
import { ConsoleApp } from "./app.js";
import { renderCompanyOptions, renderFormError, renderRunView } from "./views.js";

/** Same-origin by default; a host page may set this before loading us. */
const API_BASE =
  (globalThis as { DILIGENCE_API_BASE?: string }).DILIGENCE_API_BASE ?? "";

function bootstrap(): void {
  const form = document.querySelector<HTMLFormElement>("#trigger-form");
  const select = document.querySelector<HTMLSelectElement>("#company");
  const email = document.querySelector<HTMLInputElement>("#email");
  const submit = document.querySelector<HTMLButtonElement>("#submit");
  const formError = document.getElementById("form-error");
  const runView = document.getElementById("run-view");
  if (!form || !select || !email || !submit || !formError || !runView) {
    return;
  }

  const app = new ConsoleApp({
    api: new ApiClient(API_BASE),
    render: (vm) => {
      formError.innerHTML = renderFormError(vm.formError);
      runView.innerHTML = renderRunView(vm);
      if (select.options.length === 0 && vm.companies.length > 0) {
        select.innerHTML = renderCompanyOptions(vm.companies);
      }
    },
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    submit.disabled = true;
    void app.submitTrigger(select.value, email.value).finally(() => {
      submit.disabled = false;
    });
  });

  void app.loadCompanies();
}

document.addEventListener("DOMContentLoaded", bootstrap);
